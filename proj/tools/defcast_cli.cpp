#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "defcast/acceptance.hpp"
#include "defcast/config.hpp"
#include "defcast/errors.hpp"
#include "defcast/game.hpp"
#include "defcast/metrics.hpp"
#include "json.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kSolverFailure = 2;
constexpr int kCheckFailure = 3;

/// Inline JSON if the argument looks like an object, otherwise a file path.
nlohmann::json json_argument(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && arg[first] == '{') {
        try {
            return nlohmann::json::parse(arg);
        } catch (const nlohmann::json::exception& e) {
            throw defcast::InputError(std::string("bad inline JSON: ") + e.what());
        }
    }
    std::ifstream in(arg);
    if (!in) throw defcast::InputError("cannot open " + arg);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw defcast::InputError(arg + " is not valid JSON: " + e.what());
    }
}

std::string default_output(const std::string& stem, const std::string& ext) {
    if (const char* dir = std::getenv("DEFCAST_OUT_DIR"); dir != nullptr && *dir != '\0') {
        return (std::filesystem::path(dir) / (stem + ext)).string();
    }
    return "";
}

struct GameArgs {
    std::string config;
    std::optional<std::size_t> rounds;
    std::optional<std::uint64_t> seed;
    std::string kernel;
    std::string loss;
    std::string out;
};

int play(defcast::Mode mode, const GameArgs& args) {
    defcast::RunConfig cfg;
    if (!args.config.empty()) cfg = defcast::load_config(args.config);
    cfg.mode = mode;
    if (args.rounds) cfg.rounds = *args.rounds;
    if (args.seed) cfg.seed = *args.seed;
    if (!args.kernel.empty()) cfg.kernel = defcast::kernel_from_json(json_argument(args.kernel));
    if (!args.loss.empty()) {
        if (args.loss == "absolute" || args.loss == "quadratic") {
            cfg.loss = defcast::loss_from_json({{"kind", args.loss}});
        } else {
            cfg.loss = defcast::loss_from_json(json_argument(args.loss));
        }
    }
    if (mode != defcast::Mode::decide && cfg.randomize) cfg.randomize = false;
    cfg.validate();

    const defcast::Transcript t = defcast::run_game(cfg);
    const std::string out = args.out.empty() ? default_output(defcast::mode_name(mode), ".jsonl") : args.out;
    if (out.empty()) {
        defcast::write_jsonl(std::cout, t);
    } else {
        defcast::save_transcript(out, t);
    }

    double worst = 0.0;
    for (const auto& r : t.rounds) worst = std::max(worst, r.cert.value_or(0.0));
    std::cerr << defcast::mode_name(mode) << ": " << t.size() << " rounds";
    if (!t.rounds.empty()) {
        std::cerr << ", final quadratic capital " << t.rounds.back().cap.at("quadratic") << ", max certificate "
                  << worst;
    }
    if (t.total_escalations() > 0) std::cerr << ", " << t.total_escalations() << " radius escalations";
    if (!out.empty()) std::cerr << ", written to " << out;
    std::cerr << '\n';
    return kOk;
}

struct MetricsArgs {
    std::string transcript;
    double width = 0.1;
    std::size_t cls = 1;
    std::string rule;
    std::string out;
};

int metrics(const MetricsArgs& args) {
    const defcast::Transcript t = defcast::load_transcript(args.transcript);
    t.validate();
    std::vector<defcast::MetricRow> rows;
    for (const auto& b : defcast::calibration_bins(t, args.width, args.cls)) {
        std::ostringstream params;
        params << "class=" << args.cls << " bin=[" << b.lo << " " << b.hi << ") count=" << b.count;
        rows.push_back({"calibration", params.str(), t.size(), b.deviation, args.width, b.deviation / args.width});
    }
    if (!t.rounds.empty() && t.rounds.back().cap.count("quadratic") > 0) {
        const double s = t.rounds.back().cap.at("quadratic");
        rows.push_back({"quadratic_capital", "", t.size(), s, 0.0, 0.0});
    }
    if (!args.rule.empty()) {
        if (!t.metadata.contains("loss")) throw defcast::InputError("transcript metadata has no loss");
        const auto loss = defcast::loss_from_json(t.metadata["loss"]);
        const auto rule = defcast::PredictionRule::from_json(json_argument(args.rule));
        const double c_kernel = t.metadata.value("kernel_constant", 1.0);
        const auto rep = defcast::regret(t, rule, loss, c_kernel, 0.0);
        rows.push_back({"regret", "norm=0", t.size(), rep.regret, rep.bound, rep.regret / rep.bound});
    }
    const std::string out = args.out.empty() ? default_output("metrics", ".csv") : args.out;
    if (out.empty()) {
        defcast::write_metrics_csv(std::cout, rows);
    } else {
        std::ofstream f(out);
        if (!f) throw defcast::InputError("cannot open " + out + " for writing");
        defcast::write_metrics_csv(f, rows);
    }
    return kOk;
}

int bench(const std::string& suite, std::size_t rounds, std::size_t seeds) {
    const auto results = defcast::acceptance::run(suite, {rounds, seeds});
    bool ok = true;
    for (const auto& r : results) {
        std::cout << defcast::acceptance::format(r) << '\n';
        ok = ok && r.passed;
    }
    return ok ? kOk : kCheckFailure;
}

void add_game_options(CLI::App* cmd, GameArgs& args) {
    cmd->add_option("--config", args.config, "Run configuration (JSON)");
    cmd->add_option("--rounds", args.rounds, "Number of rounds");
    cmd->add_option("--seed", args.seed, "Stream seed");
    cmd->add_option("--kernel", args.kernel, "Kernel spec: inline JSON or a file");
    cmd->add_option("--loss", args.loss, "Loss spec: absolute, quadratic, inline JSON or a file");
    cmd->add_option("--out", args.out, "Transcript path (JSONL); default $DEFCAST_OUT_DIR or stdout");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Defensive forecasting engine"};
    app.require_subcommand(1);

    GameArgs forecast_args;
    GameArgs decide_args;
    GameArgs test_args;
    auto* forecast_cmd = app.add_subcommand("forecast", "Play a probability-forecasting game");
    auto* decide_cmd = app.add_subcommand("decide", "Play a competitive prediction game");
    auto* test_cmd = app.add_subcommand("test", "Run the Skeptics against a fixed forecast");
    add_game_options(forecast_cmd, forecast_args);
    add_game_options(decide_cmd, decide_args);
    add_game_options(test_cmd, test_args);

    MetricsArgs metrics_args;
    auto* metrics_cmd = app.add_subcommand("metrics", "Evaluate a saved transcript");
    metrics_cmd->add_option("transcript,--transcript", metrics_args.transcript, "Transcript JSONL")->required();
    metrics_cmd->add_option("--width", metrics_args.width, "Calibration bin width");
    metrics_cmd->add_option("--class", metrics_args.cls, "Class for the calibration table");
    metrics_cmd->add_option("--rule", metrics_args.rule, "Prediction rule for regret: inline JSON or a file");
    metrics_cmd->add_option("--out", metrics_args.out, "CSV path; default $DEFCAST_OUT_DIR or stdout");

    std::string suite = "all";
    std::size_t bench_rounds = 0;
    std::size_t bench_seeds = 0;
    auto* bench_cmd = app.add_subcommand("bench", "Run acceptance suites");
    bench_cmd->add_option("--suite", suite, "Suite name")
        ->check(CLI::IsMember(defcast::acceptance::suite_names()));
    bench_cmd->add_option("--rounds", bench_rounds, "Override the suite horizon");
    bench_cmd->add_option("--seeds", bench_seeds, "Override the seed count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kInputError;
    }

    try {
        if (*forecast_cmd) return play(defcast::Mode::forecast, forecast_args);
        if (*decide_cmd) return play(defcast::Mode::decide, decide_args);
        if (*test_cmd) return play(defcast::Mode::test, test_args);
        if (*metrics_cmd) return metrics(metrics_args);
        if (*bench_cmd) return bench(suite, bench_rounds, bench_seeds);
    } catch (const defcast::SolverFailure& e) {
        std::cerr << "solver failure at round " << e.round() << ": " << e.what() << '\n';
        return kSolverFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}
