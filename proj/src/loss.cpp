#include "defcast/loss.hpp"

#include <cmath>
#include <string>

#include "defcast/errors.hpp"

namespace defcast {

LossSpec LossSpec::absolute() { return {Kind::absolute, 2}; }

LossSpec LossSpec::quadratic() { return {Kind::quadratic, 2}; }

LossSpec LossSpec::brier(std::size_t classes) {
    if (classes < 2) throw InputError("Brier loss needs at least two classes");
    return {Kind::brier, classes};
}

LossSpec LossSpec::cover(std::size_t stocks, double lo, double hi, std::size_t levels) {
    if (stocks < 2) throw InputError("Cover loss needs at least two stocks");
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw InputError("Cover clamp must satisfy 0 < lo <= hi");
    if (levels < 1 || (levels == 1 && lo != hi)) throw InputError("Cover loss needs at least two price levels");
    std::size_t classes = 1;
    for (std::size_t k = 0; k < stocks; ++k) {
        classes *= levels;
        if (classes > 4096) throw InputError("Cover observation grid is too large");
    }
    if (classes < 2) throw InputError("Cover observation grid has a single outcome");
    LossSpec s(Kind::cover, classes);
    s.stocks_ = stocks;
    s.lo_ = lo;
    s.hi_ = hi;
    s.levels_ = levels;
    return s;
}

std::size_t LossSpec::prediction_dim() const noexcept {
    switch (kind_) {
        case Kind::absolute:
        case Kind::quadratic:
            return 1;
        case Kind::brier:
            return classes_;
        case Kind::cover:
            return stocks_;
    }
    return 1;
}

std::vector<double> LossSpec::price_relatives(std::size_t y) const {
    if (kind_ != Kind::cover) throw InputError("price relatives exist only for the Cover loss");
    if (y >= classes_) throw InputError("observation index out of range");
    std::vector<double> r(stocks_);
    for (std::size_t k = 0; k < stocks_; ++k) {
        const std::size_t level = y % levels_;
        y /= levels_;
        r[k] = levels_ == 1 ? lo_ : lo_ + (hi_ - lo_) * static_cast<double>(level) / static_cast<double>(levels_ - 1);
    }
    return r;
}

void LossSpec::check_prediction(std::span<const double> gamma) const {
    if (gamma.size() != prediction_dim()) throw DomainError("prediction has the wrong dimension");
    for (double g : gamma) {
        if (!std::isfinite(g)) throw DomainError("prediction is not finite");
    }
    if (simplex_predictions()) {
        double sum = 0.0;
        for (double g : gamma) {
            if (g < 0.0) throw DomainError("prediction has a negative weight");
            sum += g;
        }
        if (std::abs(sum - 1.0) > Simplex::kSumTolerance) throw DomainError("prediction weights do not sum to one");
    } else if (gamma[0] < 0.0 || gamma[0] > 1.0) {
        throw DomainError("prediction outside [0, 1]");
    }
}

double LossSpec::value(std::span<const double> gamma, std::size_t y) const {
    switch (kind_) {
        case Kind::absolute:
            return std::abs(static_cast<double>(y) - gamma[0]);
        case Kind::quadratic: {
            const double d = static_cast<double>(y) - gamma[0];
            return d * d;
        }
        case Kind::brier: {
            double s = 0.0;
            for (std::size_t c = 0; c < classes_; ++c) {
                const double d = gamma[c] - (c == y ? 1.0 : 0.0);
                s += d * d;
            }
            return s;
        }
        case Kind::cover: {
            double wealth = 0.0;
            std::size_t rest = y;
            for (std::size_t k = 0; k < stocks_; ++k) {
                const std::size_t level = rest % levels_;
                rest /= levels_;
                const double r = levels_ == 1 ? lo_
                                              : lo_ + (hi_ - lo_) * static_cast<double>(level) /
                                                          static_cast<double>(levels_ - 1);
                wealth += gamma[k] * r;
            }
            return -std::log(wealth);
        }
    }
    return 0.0;
}

double LossSpec::range() const noexcept {
    switch (kind_) {
        case Kind::absolute:
        case Kind::quadratic:
            return 1.0;
        case Kind::brier:
            return 2.0;
        case Kind::cover:
            return std::log(hi_ / lo_);
    }
    return 0.0;
}

double LossSpec::lipschitz() const noexcept {
    switch (kind_) {
        case Kind::absolute:
            return 1.0;
        case Kind::quadratic:
        case Kind::brier:
            return 2.0;
        case Kind::cover:
            return hi_ / lo_;
    }
    return 0.0;
}

double expected_loss(const LossSpec& loss, std::span<const double> gamma, const Simplex& p) {
    if (p.size() != loss.classes()) throw InputError("forecast has the wrong number of classes");
    loss.check_prediction(gamma);
    double s = 0.0;
    for (std::size_t y = 0; y < p.size(); ++y) {
        if (p[y] != 0.0) s += p[y] * loss.value(gamma, y);
    }
    return s;
}

nlohmann::json loss_to_json(const LossSpec& loss) {
    switch (loss.kind()) {
        case LossSpec::Kind::absolute:
            return {{"kind", "absolute"}};
        case LossSpec::Kind::quadratic:
            return {{"kind", "quadratic"}};
        case LossSpec::Kind::brier:
            return {{"kind", "brier"}, {"classes", loss.classes()}};
        case LossSpec::Kind::cover:
            return {{"kind", "cover"},
                    {"stocks", loss.stocks()},
                    {"clamp", {loss.lo(), loss.hi()}},
                    {"levels", loss.levels()}};
    }
    return {};
}

LossSpec loss_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "absolute") return LossSpec::absolute();
        if (kind == "quadratic") return LossSpec::quadratic();
        if (kind == "brier") return LossSpec::brier(j.value("classes", std::size_t{2}));
        if (kind == "cover") {
            const auto clamp = j.at("clamp");
            if (!clamp.is_array() || clamp.size() != 2) throw InputError("cover clamp must be [lo, hi]");
            return LossSpec::cover(j.at("stocks").get<std::size_t>(), clamp[0].get<double>(), clamp[1].get<double>(),
                                   j.value("levels", std::size_t{2}));
        }
        throw InputError("unknown loss kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad loss spec: ") + e.what());
    }
}

}  // namespace defcast
