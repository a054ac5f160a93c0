#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace defcast {

/// Probability distribution over m >= 2 classes.
///
/// Construction validates non-negativity and that the weights sum to one
/// within 1e-12; a Simplex is therefore always a valid forecast.
class Simplex {
public:
    static constexpr double kSumTolerance = 1e-12;

    explicit Simplex(std::vector<double> weights);

    static Simplex uniform(std::size_t m);
    /// Binary forecast (1 - p, p).
    static Simplex binary(double p);
    /// Nearest point of the simplex in Euclidean distance, renormalized.
    static Simplex projected(std::span<const double> v);

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> weights() const noexcept { return w_; }
    const std::vector<double>& vec() const noexcept { return w_; }

    bool operator==(const Simplex&) const = default;

private:
    std::vector<double> w_;
};

/// Euclidean projection of v onto the probability simplex, written into out.
void project_to_simplex(std::span<const double> v, std::span<double> out);

}  // namespace defcast
