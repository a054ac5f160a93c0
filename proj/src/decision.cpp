#include "defcast/decision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "defcast/errors.hpp"

namespace defcast {

namespace {

/// Gradient and value of E_P[-ln <g, r(y)>] + tau |g - u|^2.
double cover_objective(const LossSpec& loss, std::span<const double> p, const std::vector<std::vector<double>>& rel,
                       double tau, std::span<const double> g, std::span<double> grad) {
    const std::size_t k = g.size();
    const double u = 1.0 / static_cast<double>(k);
    double f = 0.0;
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t y = 0; y < loss.classes(); ++y) {
        if (p[y] == 0.0) continue;
        double w = 0.0;
        for (std::size_t j = 0; j < k; ++j) w += g[j] * rel[y][j];
        f -= p[y] * std::log(w);
        if (!grad.empty()) {
            for (std::size_t j = 0; j < k; ++j) grad[j] -= p[y] * rel[y][j] / w;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        f += tau * (g[j] - u) * (g[j] - u);
        if (!grad.empty()) grad[j] += 2.0 * tau * (g[j] - u);
    }
    return f;
}

void cover_choice(const LossSpec& loss, std::span<const double> p, double eps, std::span<double> out) {
    const std::size_t k = loss.stocks();
    std::vector<std::vector<double>> rel(loss.classes());
    for (std::size_t y = 0; y < loss.classes(); ++y) rel[y] = loss.price_relatives(y);
    // Strong convexity makes the minimizer unique, hence continuous in P;
    // the penalty costs at most tau since |g - u|^2 < 1 on the simplex.
    const double tau = 0.5 * eps;

    if (k == 2) {
        std::vector<double> g(2);
        auto f = [&](double t) {
            g[0] = t;
            g[1] = 1.0 - t;
            return cover_objective(loss, p, rel, tau, g, {});
        };
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0;
        double b = 1.0;
        double c = b - invphi * (b - a);
        double d = a + invphi * (b - a);
        double fc = f(c);
        double fd = f(d);
        while (b - a > 1e-12) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = f(d);
            }
        }
        const double t = 0.5 * (a + b);
        out[0] = t;
        out[1] = 1.0 - t;
        return;
    }

    double lmax = 0.0;
    for (const auto& r : rel) {
        double sq = 0.0;
        for (double v : r) sq += v * v;
        lmax = std::max(lmax, sq);
    }
    const double lipschitz = lmax / (loss.lo() * loss.lo()) + 2.0 * tau;
    std::vector<double> xk(k, 1.0 / static_cast<double>(k));
    std::vector<double> yk = xk;
    std::vector<double> next(k);
    std::vector<double> grad(k);
    std::vector<double> step(k);
    double t = 1.0;
    for (int iter = 0; iter < 20000; ++iter) {
        cover_objective(loss, p, rel, tau, yk, grad);
        for (std::size_t j = 0; j < k; ++j) step[j] = yk[j] - grad[j] / lipschitz;
        project_to_simplex(step, next);
        double moved = 0.0;
        for (std::size_t j = 0; j < k; ++j) moved = std::max(moved, std::abs(next[j] - xk[j]));
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t j = 0; j < k; ++j) yk[j] = next[j] + (t - 1.0) / t_next * (next[j] - xk[j]);
        t = t_next;
        xk = next;
        if (moved < 1e-15) break;
    }
    std::copy(xk.begin(), xk.end(), out.begin());
}

}  // namespace

double DecisionConfig::epsilon(std::size_t n) const {
    if (n == 0) throw InputError("round indices start at 1");
    return std::max(std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 1074))), epsilon_floor);
}

void choice_into(const LossSpec& loss, std::span<const double> p, double eps, std::span<double> out) {
    if (!(eps > 0.0)) throw InputError("choice slack must be positive");
    switch (loss.kind()) {
        case LossSpec::Kind::absolute: {
            // The expected loss is linear in gamma with slope 1 - 2 P(1); a ramp
            // of width w around 1/2 is continuous and at most w / 8 suboptimal.
            const double w = std::min(4.0 * eps, 0.1);
            out[0] = std::clamp(0.5 + (p[1] - 0.5) / w, 0.0, 1.0);
            return;
        }
        case LossSpec::Kind::quadratic:
            out[0] = p[1];
            return;
        case LossSpec::Kind::brier:
            std::copy(p.begin(), p.end(), out.begin());
            return;
        case LossSpec::Kind::cover:
            cover_choice(loss, p, eps, out);
            return;
    }
}

std::vector<double> choice(const LossSpec& loss, std::span<const double> x, const Simplex& p, double eps) {
    (void)x;
    if (p.size() != loss.classes()) throw InputError("forecast has the wrong number of classes");
    std::vector<double> out(loss.prediction_dim());
    choice_into(loss, p.weights(), eps, out);
    return out;
}

PredictionRule PredictionRule::constant(std::vector<double> gamma) {
    PredictionRule r;
    r.kind_ = Kind::constant;
    r.gamma_ = std::move(gamma);
    return r;
}

PredictionRule PredictionRule::table(std::vector<std::pair<std::vector<double>, std::vector<double>>> entries) {
    PredictionRule r;
    r.kind_ = Kind::table;
    r.table_ = std::move(entries);
    return r;
}

PredictionRule PredictionRule::logistic(std::vector<std::vector<double>> weights, std::vector<double> bias) {
    if (weights.empty() || weights.size() != bias.size()) throw InputError("logistic rule needs one bias per row");
    for (const auto& row : weights) {
        if (row.size() != weights.front().size()) throw InputError("logistic weight rows differ in length");
    }
    PredictionRule r;
    r.kind_ = Kind::logistic;
    r.weights_ = std::move(weights);
    r.bias_ = std::move(bias);
    return r;
}

std::vector<double> PredictionRule::operator()(std::span<const double> x) const {
    switch (kind_) {
        case Kind::constant:
            return gamma_;
        case Kind::table:
            for (const auto& [key, value] : table_) {
                if (std::equal(key.begin(), key.end(), x.begin(), x.end())) return value;
            }
            throw InputError("prediction rule is undefined at a datum");
        case Kind::logistic: {
            if (x.size() != weights_.front().size()) throw InputError("datum dimension does not match the rule");
            std::vector<double> z(weights_.size());
            for (std::size_t r = 0; r < weights_.size(); ++r) {
                z[r] = bias_[r];
                for (std::size_t j = 0; j < x.size(); ++j) z[r] += weights_[r][j] * x[j];
            }
            if (z.size() == 1) return {1.0 / (1.0 + std::exp(-z[0]))};
            const double top = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (double& v : z) {
                v = std::exp(v - top);
                sum += v;
            }
            for (double& v : z) v /= sum;
            return z;
        }
    }
    return {};
}

nlohmann::json PredictionRule::to_json() const {
    switch (kind_) {
        case Kind::constant:
            return {{"kind", "constant"}, {"gamma", gamma_}};
        case Kind::table: {
            nlohmann::json entries = nlohmann::json::array();
            for (const auto& [k, v] : table_) entries.push_back({{"x", k}, {"gamma", v}});
            return {{"kind", "table"}, {"entries", entries}};
        }
        case Kind::logistic:
            return {{"kind", "logistic"}, {"weights", weights_}, {"bias", bias_}};
    }
    return {};
}

PredictionRule PredictionRule::from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "constant") {
            const auto& g = j.at("gamma");
            return constant(g.is_number() ? std::vector<double>{g.get<double>()} : g.get<std::vector<double>>());
        }
        if (kind == "table") {
            std::vector<std::pair<std::vector<double>, std::vector<double>>> entries;
            for (const auto& e : j.at("entries")) {
                entries.emplace_back(e.at("x").get<std::vector<double>>(), e.at("gamma").get<std::vector<double>>());
            }
            return table(std::move(entries));
        }
        if (kind == "logistic") {
            const auto& w = j.at("weights");
            if (!w.empty() && w.front().is_number()) {
                return logistic({w.get<std::vector<double>>()}, {j.value("bias", 0.0)});
            }
            return logistic(w.get<std::vector<std::vector<double>>>(), j.at("bias").get<std::vector<double>>());
        }
        throw InputError("unknown prediction rule kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad prediction rule: ") + e.what());
    }
}

ScalarFeature loss_feature(const LossSpec& loss, double eps) {
    return [loss, eps, gamma = std::vector<double>(loss.prediction_dim())](
               std::span<const double>, std::span<const double> p, std::span<double> out) mutable {
        choice_into(loss, p, eps, gamma);
        for (std::size_t y = 0; y < out.size(); ++y) out[y] = loss.value(gamma, y);
    };
}

MasterStep master_predict_step(const ForecastState& state, const DecisionConfig& config, std::span<const double> x,
                               std::size_t n) {
    if (state.classes() != config.loss.classes()) throw InputError("loss and forecaster disagree on the class count");
    MasterStep step;
    step.n = n;
    step.epsilon = config.epsilon(n);
    const ScalarFeature feature = loss_feature(config.loss, step.epsilon);
    step.p = defensive_forecast(state, x, &feature, &step.certificate);
    step.gamma = choice(config.loss, x, step.p, step.epsilon);
    return step;
}

MasterPredictor::MasterPredictor(KernelSpec kernel, DecisionConfig config, ForecastConfig forecast)
    : config_(std::move(config)), state_(std::move(kernel), config_.loss.classes(), forecast) {}

MasterStep MasterPredictor::predict(std::span<const double> x) const {
    return master_predict_step(state_, config_, x, next_round());
}

ObserveResult MasterPredictor::observe(std::span<const double> x, const MasterStep& step, std::size_t y) {
    const ScalarFeature feature = loss_feature(config_.loss, step.epsilon);
    return state_.observe(x, step.p, y, &feature);
}

}  // namespace defcast
