#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "defcast/simplex.hpp"
#include "json.hpp"

namespace defcast {

/// Built-in loss functions lambda(x, gamma, y) over a finite observation space.
///
/// Predictions are vectors: a single coordinate in [0, 1] for the binary
/// losses, a point of the simplex for Brier and Cover. None of the built-ins
/// depends on the datum, so x is not an argument.
class LossSpec {
public:
    enum class Kind { absolute, quadratic, brier, cover };

    static LossSpec absolute();
    static LossSpec quadratic();
    static LossSpec brier(std::size_t classes);
    /// Cover's investment loss -ln <g, r(y)> with K stocks. Outcome y indexes
    /// the grid {lo, ..., hi}^K of price relatives (`levels` values per stock).
    static LossSpec cover(std::size_t stocks, double lo, double hi, std::size_t levels = 2);

    Kind kind() const noexcept { return kind_; }
    std::size_t classes() const noexcept { return classes_; }
    /// Length of a prediction vector.
    std::size_t prediction_dim() const noexcept;
    bool simplex_predictions() const noexcept { return kind_ == Kind::brier || kind_ == Kind::cover; }

    std::size_t stocks() const noexcept { return stocks_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::size_t levels() const noexcept { return levels_; }

    /// Price relatives r(y) of a Cover outcome.
    std::vector<double> price_relatives(std::size_t y) const;

    /// Throws DomainError unless gamma lies in the prediction space.
    void check_prediction(std::span<const double> gamma) const;

    /// lambda(gamma, y). No domain check; see check_prediction.
    double value(std::span<const double> gamma, std::size_t y) const;

    /// sup lambda - inf lambda over predictions and outcomes.
    double range() const noexcept;

    /// Lipschitz constant of gamma -> lambda(gamma, y) in the l1 norm.
    double lipschitz() const noexcept;

    bool operator==(const LossSpec&) const = default;

private:
    LossSpec(Kind kind, std::size_t classes) : kind_(kind), classes_(classes) {}

    Kind kind_;
    std::size_t classes_;
    std::size_t stocks_ = 0;
    double lo_ = 1.0;
    double hi_ = 1.0;
    std::size_t levels_ = 0;
};

/// lambda(gamma, P) = sum_y P(y) lambda(gamma, y).
double expected_loss(const LossSpec& loss, std::span<const double> gamma, const Simplex& p);

nlohmann::json loss_to_json(const LossSpec& loss);
LossSpec loss_from_json(const nlohmann::json& j);

}  // namespace defcast
