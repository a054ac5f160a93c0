#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "defcast/kernel.hpp"

namespace defcast {

/// Cached kernel sums over a growing history of realized rounds.
///
/// For a candidate (x, P) the engine needs, for every class y,
///
///     B_y(x, P) = sum_i sum_{y''} w_i(y'') k((x_i, P_i, y''), (x, P, y)),
///     w_i = e_{y_i} - P_i,
///
/// which is the kernel expansion of <sum_i Psi_i, Phi(x, P, y)>. The kernel
/// tree is flattened into weighted block-product terms (plus generic terms
/// for non-factorizing kernels) so that the datum factor is evaluated once
/// per round and only the forecast factor once per candidate.
class KernelRows {
public:
    KernelRows(KernelSpec spec, std::size_t classes);

    /// Per-round data that depends on the datum x but not on the candidate P.
    struct RoundCache {
        std::vector<double> x;
        std::vector<std::vector<double>> datum_factor;  // per factor term, one value per history point
        std::vector<double> fixed;                      // contribution of forecast-independent terms
    };

    void append(const PointView& z);
    void clear();

    std::size_t size() const noexcept { return ys_.size(); }
    std::size_t classes() const noexcept { return m_; }
    std::size_t dim() const noexcept { return d_; }
    const KernelSpec& spec() const noexcept { return spec_; }

    RoundCache prepare(std::span<const double> x) const;

    /// Adds B(x, P) into `b` (length m). `scratch` is caller-owned working memory.
    void accumulate(const RoundCache& cache, std::span<const double> p, std::span<double> b,
                    std::vector<double>& scratch) const;

    /// Same sums without OpenMP; bit-identical to accumulate().
    void accumulate_serial(const RoundCache& cache, std::span<const double> p, std::span<double> b,
                           std::vector<double>& scratch) const;

private:
    struct FactorTerm {
        double weight;
        CoordinateKernel x;
        CoordinateKernel p;
        ClassKernel y;
        std::vector<double> mixed;  // n x m: sum_{y''} w_i(y'') ky(y'', y)
    };
    struct GenericTerm {
        double weight;
        KernelSpec spec;
    };

    void flatten(const KernelSpec& spec, double weight);
    template <bool Parallel>
    void accumulate_impl(const RoundCache& cache, std::span<const double> p, std::span<double> b,
                         std::vector<double>& scratch) const;

    KernelSpec spec_;
    std::size_t m_;
    std::size_t d_ = 0;
    bool dim_set_ = false;
    std::vector<FactorTerm> factors_;
    std::vector<GenericTerm> generics_;

    std::vector<double> xs_;  // n x d
    std::vector<double> ps_;  // n x m
    std::vector<double> ws_;  // n x m
    std::vector<std::size_t> ys_;
};

}  // namespace defcast
