#include "defcast/stream.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "defcast/errors.hpp"
#include "defcast/transcript.hpp"

namespace defcast {

namespace {

std::size_t draw_class(std::mt19937_64& rng, const std::vector<double>& probs) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < probs.size(); ++c) {
        acc += probs[c];
        if (u < acc) return c;
    }
    return probs.size() - 1;
}

class AlternatingParity final : public Stream {
public:
    std::vector<double> datum(std::size_t n) override { return {static_cast<double>(n % 2)}; }
    std::size_t outcome(std::size_t n, const Simplex&, const std::vector<double>*) override { return n % 2; }
};

class SignFlip final : public Stream {
public:
    std::vector<double> datum(std::size_t) override { return {x_}; }
    std::size_t outcome(std::size_t n, const Simplex& p, const std::vector<double>* gamma) override {
        const double lean = (gamma != nullptr && !gamma->empty()) ? gamma->front() : p[1];
        const double sign = lean >= 0.5 ? 1.0 : -1.0;
        x_ += sign / std::pow(3.0, static_cast<double>(n));
        return sign < 0.0 ? 1 : 0;
    }

private:
    double x_ = 0.0;
};

class Categorical final : public Stream {
public:
    Categorical(std::vector<double> probs, std::uint64_t seed, std::size_t dim)
        : probs_(std::move(probs)), rng_(seed), dim_(dim) {}
    std::vector<double> datum(std::size_t) override {
        std::vector<double> x(dim_);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (double& v : x) v = u(rng_);
        return x;
    }
    std::size_t outcome(std::size_t, const Simplex&, const std::vector<double>*) override {
        return draw_class(rng_, probs_);
    }

private:
    std::vector<double> probs_;
    std::mt19937_64 rng_;
    std::size_t dim_;
};

class Logistic final : public Stream {
public:
    Logistic(std::vector<std::vector<double>> w, std::vector<double> b, std::uint64_t seed)
        : w_(std::move(w)), b_(std::move(b)), rng_(seed) {}
    std::vector<double> datum(std::size_t) override {
        x_.assign(w_.front().size(), 0.0);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (double& v : x_) v = u(rng_);
        return x_;
    }
    std::size_t outcome(std::size_t, const Simplex&, const std::vector<double>*) override {
        std::vector<double> z(w_.size());
        for (std::size_t r = 0; r < w_.size(); ++r) {
            z[r] = b_[r];
            for (std::size_t j = 0; j < x_.size(); ++j) z[r] += w_[r][j] * x_[j];
        }
        std::vector<double> probs;
        if (z.size() == 1) {
            const double q = 1.0 / (1.0 + std::exp(-z[0]));
            probs = {1.0 - q, q};
        } else {
            double top = z[0];
            for (double v : z) top = std::max(top, v);
            double sum = 0.0;
            for (double& v : z) sum += (v = std::exp(v - top));
            for (double& v : z) v /= sum;
            probs = z;
        }
        return draw_class(rng_, probs);
    }

private:
    std::vector<std::vector<double>> w_;
    std::vector<double> b_;
    std::mt19937_64 rng_;
    std::vector<double> x_;
};

class Ramp final : public Stream {
public:
    std::vector<double> datum(std::size_t n) override { return {static_cast<double>(n)}; }
    std::size_t outcome(std::size_t n, const Simplex&, const std::vector<double>*) override { return n % 2; }
};

class Replay final : public Stream {
public:
    Replay(std::vector<std::vector<double>> xs, std::vector<std::size_t> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
        if (xs_.size() != ys_.size()) throw InputError("replay needs one outcome per datum");
    }
    std::vector<double> datum(std::size_t n) override { return xs_.at(check(n)); }
    std::size_t outcome(std::size_t n, const Simplex&, const std::vector<double>*) override { return ys_.at(check(n)); }
    std::optional<std::size_t> available() const override { return xs_.size(); }

private:
    std::size_t check(std::size_t n) const {
        if (n == 0 || n > xs_.size()) throw InputError("replay source exhausted at round " + std::to_string(n));
        return n - 1;
    }
    std::vector<std::vector<double>> xs_;
    std::vector<std::size_t> ys_;
};

Replay read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        std::vector<double> row;
        try {
            for (const auto& f : fields) {
                std::size_t used = 0;
                row.push_back(std::stod(f, &used));
                if (f.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(f);
            }
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw InputError("non-numeric CSV field in " + path);
        }
        first = false;
        if (row.size() < 2) throw InputError("CSV rows need at least one datum column and an outcome");
        const double y = row.back();
        if (y < 0.0 || y != std::floor(y)) throw InputError("CSV outcome must be a class index");
        ys.push_back(static_cast<std::size_t>(y));
        row.pop_back();
        xs.push_back(std::move(row));
    }
    return Replay(std::move(xs), std::move(ys));
}

const char* kind_name(StreamSpec::Kind k) {
    switch (k) {
        case StreamSpec::Kind::alternating_parity:
            return "alternating_parity";
        case StreamSpec::Kind::sign_flip_adversary:
            return "sign_flip_adversary";
        case StreamSpec::Kind::bernoulli:
            return "bernoulli";
        case StreamSpec::Kind::logistic_rule:
            return "logistic_rule";
        case StreamSpec::Kind::ramp:
            return "ramp";
        case StreamSpec::Kind::sequence:
            return "sequence";
        case StreamSpec::Kind::csv_replay:
            return "csv_replay";
        case StreamSpec::Kind::jsonl_replay:
            return "jsonl_replay";
    }
    return "";
}

}  // namespace

StreamSpec StreamSpec::bernoulli(double theta, std::uint64_t seed, std::size_t dim) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("Bernoulli parameter outside [0, 1]");
    return categorical({1.0 - theta, theta}, seed, dim);
}

StreamSpec StreamSpec::categorical(std::vector<double> probs, std::uint64_t seed, std::size_t dim) {
    Simplex check(probs);
    StreamSpec s;
    s.kind = Kind::bernoulli;
    s.probs = std::move(probs);
    s.seed = seed;
    s.dim = dim;
    return s;
}

StreamSpec StreamSpec::logistic(std::vector<std::vector<double>> weights, std::vector<double> bias,
                                std::uint64_t seed) {
    if (weights.empty() || weights.size() != bias.size()) throw InputError("logistic stream needs one bias per row");
    if (weights.size() == 2) throw InputError("logistic stream takes one row (binary) or at least three rows");
    for (const auto& row : weights) {
        if (row.empty() || row.size() != weights.front().size()) throw InputError("logistic weight rows differ");
    }
    StreamSpec s;
    s.kind = Kind::logistic_rule;
    s.dim = weights.front().size();
    s.weights = std::move(weights);
    s.bias = std::move(bias);
    s.seed = seed;
    return s;
}

StreamSpec StreamSpec::alternating_parity() {
    StreamSpec s;
    s.kind = Kind::alternating_parity;
    return s;
}

StreamSpec StreamSpec::sign_flip_adversary() {
    StreamSpec s;
    s.kind = Kind::sign_flip_adversary;
    return s;
}

StreamSpec StreamSpec::ramp() {
    StreamSpec s;
    s.kind = Kind::ramp;
    return s;
}

StreamSpec StreamSpec::sequence(std::vector<std::vector<double>> xs, std::vector<std::size_t> ys) {
    if (xs.size() != ys.size()) throw InputError("sequence needs one outcome per datum");
    StreamSpec s;
    s.kind = Kind::sequence;
    s.dim = xs.empty() ? 0 : xs.front().size();
    s.xs = std::move(xs);
    s.ys = std::move(ys);
    return s;
}

StreamSpec StreamSpec::csv_replay(std::string path) {
    StreamSpec s;
    s.kind = Kind::csv_replay;
    s.path = std::move(path);
    return s;
}

StreamSpec StreamSpec::jsonl_replay(std::string path) {
    StreamSpec s;
    s.kind = Kind::jsonl_replay;
    s.path = std::move(path);
    return s;
}

std::size_t StreamSpec::classes() const {
    switch (kind) {
        case Kind::bernoulli:
            return probs.size();
        case Kind::logistic_rule:
            return weights.size() == 1 ? 2 : weights.size();
        case Kind::sequence: {
            std::size_t m = 2;
            for (std::size_t y : ys) m = std::max(m, y + 1);
            return m;
        }
        default:
            return 2;
    }
}

nlohmann::json stream_to_json(const StreamSpec& s) {
    nlohmann::json j{{"kind", kind_name(s.kind)}};
    switch (s.kind) {
        case StreamSpec::Kind::bernoulli:
            if (s.probs.size() == 2) {
                j["theta"] = s.probs[1];
            } else {
                j["probs"] = s.probs;
            }
            j["seed"] = s.seed;
            j["dim"] = s.dim;
            break;
        case StreamSpec::Kind::logistic_rule:
            j["weights"] = s.weights;
            j["bias"] = s.bias;
            j["seed"] = s.seed;
            break;
        case StreamSpec::Kind::sequence:
            j["xs"] = s.xs;
            j["ys"] = s.ys;
            break;
        case StreamSpec::Kind::csv_replay:
        case StreamSpec::Kind::jsonl_replay:
            j["path"] = s.path;
            break;
        default:
            break;
    }
    return j;
}

StreamSpec stream_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const auto seed = j.value("seed", std::uint64_t{0});
        if (kind == "bernoulli") {
            if (j.contains("probs")) {
                return StreamSpec::categorical(j["probs"].get<std::vector<double>>(), seed, j.value("dim", std::size_t{1}));
            }
            return StreamSpec::bernoulli(j.at("theta").get<double>(), seed, j.value("dim", std::size_t{1}));
        }
        if (kind == "logistic_rule") {
            const auto& w = j.at("weights");
            if (!w.empty() && w.front().is_number()) {
                return StreamSpec::logistic({w.get<std::vector<double>>()}, {j.value("bias", 0.0)}, seed);
            }
            return StreamSpec::logistic(w.get<std::vector<std::vector<double>>>(),
                                        j.at("bias").get<std::vector<double>>(), seed);
        }
        if (kind == "alternating_parity") return StreamSpec::alternating_parity();
        if (kind == "sign_flip_adversary") return StreamSpec::sign_flip_adversary();
        if (kind == "ramp") return StreamSpec::ramp();
        if (kind == "sequence") {
            return StreamSpec::sequence(j.at("xs").get<std::vector<std::vector<double>>>(),
                                        j.at("ys").get<std::vector<std::size_t>>());
        }
        if (kind == "csv_replay") return StreamSpec::csv_replay(j.at("path").get<std::string>());
        if (kind == "jsonl_replay") return StreamSpec::jsonl_replay(j.at("path").get<std::string>());
        throw InputError("unknown stream kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad stream spec: ") + e.what());
    }
}

std::unique_ptr<Stream> make_stream(const StreamSpec& spec) {
    switch (spec.kind) {
        case StreamSpec::Kind::alternating_parity:
            return std::make_unique<AlternatingParity>();
        case StreamSpec::Kind::sign_flip_adversary:
            return std::make_unique<SignFlip>();
        case StreamSpec::Kind::bernoulli:
            return std::make_unique<Categorical>(spec.probs, spec.seed, spec.dim);
        case StreamSpec::Kind::logistic_rule:
            return std::make_unique<Logistic>(spec.weights, spec.bias, spec.seed);
        case StreamSpec::Kind::ramp:
            return std::make_unique<Ramp>();
        case StreamSpec::Kind::sequence:
            return std::make_unique<Replay>(spec.xs, spec.ys);
        case StreamSpec::Kind::csv_replay:
            return std::make_unique<Replay>(read_csv(spec.path));
        case StreamSpec::Kind::jsonl_replay: {
            const Transcript t = load_transcript(spec.path);
            std::vector<std::vector<double>> xs;
            std::vector<std::size_t> ys;
            for (const auto& r : t.rounds) {
                xs.push_back(r.x);
                ys.push_back(r.y);
            }
            return std::make_unique<Replay>(std::move(xs), std::move(ys));
        }
    }
    throw InputError("unsupported stream kind");
}

}  // namespace defcast
