#include "defcast/config.hpp"

#include <cmath>
#include <fstream>

#include "defcast/errors.hpp"

namespace defcast {

std::size_t RunConfig::classes() const {
    if (loss) return loss->classes();
    if (forecast) return forecast->size();
    return stream.classes();
}

void RunConfig::validate() const {
    const std::size_t m = classes();
    if (mode == Mode::decide && !loss) throw InputError("decide mode needs a loss");
    const bool replay = stream.kind == StreamSpec::Kind::csv_replay || stream.kind == StreamSpec::Kind::jsonl_replay;
    if (!replay && stream.kind != StreamSpec::Kind::sequence && stream.classes() != m) {
        throw InputError("stream and loss disagree on the number of classes");
    }
    if (stream.kind == StreamSpec::Kind::sequence && stream.classes() > m) {
        throw InputError("sequence outcomes exceed the class count");
    }
    if (forecast) Simplex check(*forecast);
    if (randomize) {
        if (mode != Mode::decide || !loss || loss->prediction_dim() != 1) {
            throw InputError("randomized play needs decide mode with a binary loss");
        }
    }
    if (doubling.enabled && (!(doubling.radius > 0.0) || !(doubling.factor > 1.0))) {
        throw InputError("doubling needs a positive radius and a factor above 1");
    }
    if (!(epsilon_floor > 0.0)) throw InputError("epsilon floor must be positive");
    if (mixture_c && !(*mixture_c > 0.0)) throw InputError("mixture constant must be positive");
}

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::forecast:
            return "forecast";
        case Mode::decide:
            return "decide";
        case Mode::test:
            return "test";
    }
    return "";
}

Mode mode_from_string(const std::string& s) {
    if (s == "forecast") return Mode::forecast;
    if (s == "decide") return Mode::decide;
    if (s == "test") return Mode::test;
    throw InputError("unknown mode: " + s);
}

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["mode"] = mode_name(c.mode);
    if (c.rounds) j["rounds"] = *c.rounds;
    if (c.seed) j["seed"] = *c.seed;
    j["stream"] = stream_to_json(c.stream);
    j["kernel"] = kernel_to_json(c.kernel);
    if (c.loss) j["loss"] = loss_to_json(*c.loss);
    j["tolerances"] = {{"neutral", c.tolerances.tol_neutral},
                       {"binary", c.tolerances.binary_tol},
                       {"grid_resolution", c.tolerances.grid_resolution},
                       {"grid_budget", c.tolerances.grid_budget},
                       {"max_refinements", c.tolerances.max_refinements}};
    j["epsilon_floor"] = c.epsilon_floor;
    j["doubling"] = {{"enabled", c.doubling.enabled}, {"radius", c.doubling.radius}, {"factor", c.doubling.factor}};
    j["randomize"] = c.randomize;
    if (c.rule) j["rule"] = c.rule->to_json();
    if (c.forecast) j["forecast"] = *c.forecast;
    if (c.mixture_c) j["mixture_c"] = *c.mixture_c;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw InputError("config must be a JSON object");
        RunConfig c;
        if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
        if (j.contains("rounds")) c.rounds = j["rounds"].get<std::size_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("stream")) c.stream = stream_from_json(j["stream"]);
        if (j.contains("kernel")) c.kernel = kernel_from_json(j["kernel"]);
        if (j.contains("loss") && !j["loss"].is_null()) c.loss = loss_from_json(j["loss"]);
        if (j.contains("tolerances")) {
            const auto& t = j["tolerances"];
            c.tolerances.tol_neutral = t.value("neutral", c.tolerances.tol_neutral);
            c.tolerances.binary_tol = t.value("binary", c.tolerances.binary_tol);
            c.tolerances.grid_resolution = t.value("grid_resolution", c.tolerances.grid_resolution);
            c.tolerances.grid_budget = t.value("grid_budget", c.tolerances.grid_budget);
            c.tolerances.max_refinements = t.value("max_refinements", c.tolerances.max_refinements);
        }
        c.epsilon_floor = j.value("epsilon_floor", c.epsilon_floor);
        if (j.contains("doubling")) {
            const auto& d = j["doubling"];
            c.doubling.enabled = d.value("enabled", true);
            c.doubling.radius = d.value("radius", c.doubling.radius);
            c.doubling.factor = d.value("factor", c.doubling.factor);
        }
        c.randomize = j.value("randomize", false);
        if (j.contains("rule")) c.rule = PredictionRule::from_json(j["rule"]);
        if (j.contains("forecast")) c.forecast = j["forecast"].get<std::vector<double>>();
        if (j.contains("mixture_c")) c.mixture_c = j["mixture_c"].get<double>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad config: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

}  // namespace defcast
