#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "defcast/kernel.hpp"
#include "defcast/kernel_rows.hpp"
#include "defcast/simplex.hpp"

namespace defcast {

struct ForecastConfig {
    double tol_neutral = 1e-6;      // max_y g(y, P) accepted by the general solver
    double binary_tol = 1e-9;       // |S(p)| accepted by the binary root finder
    std::size_t grid_resolution = 32;
    std::size_t grid_budget = 20000;  // resolution is lowered until the grid fits
    std::size_t max_refinements = 30;
};

/// Scalar feature channel phi(x, P, .) written for every class into `out`.
/// The decision layer uses it to carry the loss-difference component of the
/// merged feature map next to the kernel component.
using ScalarFeature =
    std::function<void(std::span<const double> x, std::span<const double> p, std::span<double> out)>;

/// Evidence that an emitted forecast neutralizes the Skeptic's gain.
struct Certificate {
    double max_gain = 0.0;      // max_y g(y, P)
    double binary_s = 0.0;      // S(p) on the binary path
    bool binary = false;
    bool boundary = false;      // binary path returned 0 or 1 by the sign rule
    std::size_t evaluations = 0;
};

struct ObserveResult {
    double gain = 0.0;             // Skeptic's increment <A, Psi_N(x_N, P_N, y_N)>
    double psi_scalar = 0.0;       // scalar component of Psi_N (0 without a feature)
    double psi_kernel_norm = 0.0;  // RKHS norm of the kernel component of Psi_N
};

/// History of realized rounds plus the cached sums that drive the next solve.
///
/// Single writer: observe() must not run concurrently with anything else.
/// The const queries are safe to run concurrently with each other.
class ForecastState {
public:
    ForecastState(KernelSpec spec, std::size_t classes, ForecastConfig config = {});

    std::size_t classes() const noexcept { return m_; }
    std::size_t size() const noexcept { return history_.size(); }
    const std::vector<ForecastPoint>& history() const noexcept { return history_; }
    const KernelSpec& spec() const noexcept { return rows_.spec(); }
    const ForecastConfig& config() const noexcept { return config_; }
    const KernelRows& rows() const noexcept { return rows_; }

    /// sum of realized scalar components psi_i.
    double scalar_sum() const noexcept { return scalar_sum_; }
    /// S_N = |sum Psi|^2 - sum |Psi|^2, accumulated from realized gains.
    double capital() const noexcept { return capital_; }
    /// sum |Psi_n|^2 over realized rounds.
    double psi_norm_sq_sum() const noexcept { return psi_norm_sq_sum_; }

    ObserveResult observe(std::span<const double> x, const Simplex& p, std::size_t y,
                          const ScalarFeature* feature = nullptr);

    /// Drops the history (used by the doubling wrapper on escalation).
    void reset();

private:
    std::size_t m_;
    ForecastConfig config_;
    KernelRows rows_;
    std::vector<ForecastPoint> history_;
    double scalar_sum_ = 0.0;
    double capital_ = 0.0;
    double psi_norm_sq_sum_ = 0.0;
};

/// g(y, P) for every y: twice the kernel expansion of <sum_i Psi_i, Psi(x, P, y)>.
std::vector<double> neutrality_gains(const ForecastState& state, std::span<const double> x, const Simplex& p,
                                     const ScalarFeature* feature = nullptr);

double neutrality_gain(const ForecastState& state, std::span<const double> x, const Simplex& p, std::size_t y,
                       const ScalarFeature* feature = nullptr);

/// Forecast P with max_y g(y, P) <= tol_neutral. Binary problems use
/// k29_binary_root. Larger class counts try uniform, then a projected
/// extragradient run from uniform, then a simplex grid scan with local
/// refinement. Throws SolverFailure if no such P is found.
Simplex defensive_forecast(const ForecastState& state, std::span<const double> x,
                           const ScalarFeature* feature = nullptr, Certificate* certificate = nullptr);

/// Binary specialization: p with |S(p)| <= binary_tol, or the boundary
/// dictated by the sign of S, where g(y, p) = 2 (y - p) S(p).
double k29_binary_root(const ForecastState& state, std::span<const double> x,
                       const ScalarFeature* feature = nullptr, Certificate* certificate = nullptr);

/// The root-finding rule behind k29_binary_root, for any continuous S on [0,1]:
/// midpoint if |S(1/2)| <= tol, else a 65-point scan, else bisection of the
/// sign change nearest 1/2, else the boundary matching the common sign.
double binary_root(const std::function<double(double)>& s, double tol, Certificate* certificate = nullptr);

}  // namespace defcast
