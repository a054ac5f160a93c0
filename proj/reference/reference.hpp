#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "defcast/kernel.hpp"
#include "defcast/loss.hpp"
#include "defcast/simplex.hpp"

/// Slow, cache-free implementations of the engine's sums. Every value is
/// recomputed from the history with direct kernel evaluations; nothing is
/// shared with the engine except eval_kernel, the choice function and the
/// binary root-finding rule.
namespace defcast::reference {

/// g(y, P) = 2 sum_i [k(z_i, (x,P,y)) - sum_y' P(y') k(z_i, (x,P,y'))
///                    - sum_y'' P_i(y'') k((x_i,P_i,y''), (x,P,y))
///                    + sum_{y',y''} P(y') P_i(y'') k((x_i,P_i,y''), (x,P,y'))]
/// plus, when `psi0` is given, 2 (sum_i psi0_i) (phi0(y) - E_P phi0).
double gain(const KernelSpec& spec, const std::vector<ForecastPoint>& history, std::span<const double> x,
            const Simplex& p, std::size_t y);

/// <Psi_i, Psi_j> in the kernel's feature space.
double psi_inner(const KernelSpec& spec, const ForecastPoint& a, const ForecastPoint& b);

/// |sum Psi|^2 - sum |Psi|^2 from the full Gram matrix of the Psi_i, plus
/// the scalar channel when `psi0` is non-empty.
double capital(const KernelSpec& spec, const std::vector<ForecastPoint>& history,
               const std::vector<double>& psi0 = {});

/// Binary forecasting game on fixed data: each forecast is the root of
/// S(p) = (g(1, p) - g(0, p)) / 2 under the shared root rule.
std::vector<Simplex> play_forecast(const KernelSpec& spec, const std::vector<std::vector<double>>& xs,
                                   const std::vector<std::size_t>& ys, double binary_tol);

struct DecideRound {
    Simplex p;
    std::vector<double> gamma;
};

/// Binary competitive-prediction game on fixed data with the merged
/// (loss-difference plus kernel) gain rebuilt from scratch every round.
std::vector<DecideRound> play_decide(const KernelSpec& spec, const LossSpec& loss, double epsilon_floor,
                                     const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& ys,
                                     double binary_tol);

}  // namespace defcast::reference
