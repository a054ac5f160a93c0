#include "defcast/kernel_rows.hpp"

#include <algorithm>
#include <cmath>

#include "defcast/errors.hpp"
#include "defcast/parallel.hpp"

namespace defcast {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

KernelRows::KernelRows(KernelSpec spec, std::size_t classes) : spec_(std::move(spec)), m_(classes) {
    if (m_ < 2) throw InputError("need at least two classes");
    flatten(spec_, 1.0);
}

void KernelRows::flatten(const KernelSpec& spec, double weight) {
    if (weight == 0.0) return;
    std::visit(
        Overloaded{
            [&](const KernelSpec::Gaussian& g) {
                // exp(-|w - w'|^2 / s^2) factorizes over the concatenated blocks.
                factors_.push_back({weight, CoordinateKernel::gaussian(g.sigma), CoordinateKernel::gaussian(g.sigma),
                                    ClassKernel::one_hot_gaussian(g.sigma), {}});
            },
            [&](const KernelSpec::InfPoly&) { generics_.push_back({weight, spec}); },
            [&](const KernelSpec::Constant& c) {
                factors_.push_back({weight * c.value, CoordinateKernel::constant(), CoordinateKernel::constant(),
                                    ClassKernel::constant(), {}});
            },
            [&](const KernelSpec::Product& k) { factors_.push_back({weight, k.x, k.p, k.y, {}}); },
            [&](const KernelSpec::WeightedSum& s) {
                for (const auto& [a, k] : s.terms) flatten(*k, weight * a);
            },
            [&](const KernelSpec::Scaled& s) { flatten(*s.inner, weight * s.c); },
        },
        spec.node());
}

void KernelRows::append(const PointView& z) {
    if (z.p.size() != m_) throw InputError("forecast has the wrong number of classes");
    if (z.y >= m_) throw InputError("observation index out of range");
    if (!dim_set_) {
        d_ = z.x.size();
        dim_set_ = true;
    } else if (z.x.size() != d_) {
        throw InputError("datum dimension changed within a history");
    }
    xs_.insert(xs_.end(), z.x.begin(), z.x.end());
    ps_.insert(ps_.end(), z.p.begin(), z.p.end());
    const std::size_t base = ws_.size();
    for (std::size_t c = 0; c < m_; ++c) ws_.push_back((c == z.y ? 1.0 : 0.0) - z.p[c]);
    ys_.push_back(z.y);

    for (auto& t : factors_) {
        for (std::size_t y = 0; y < m_; ++y) {
            double s = 0.0;
            for (std::size_t c = 0; c < m_; ++c) s += ws_[base + c] * t.y(c, y);
            t.mixed.push_back(s);
        }
    }
}

void KernelRows::clear() {
    xs_.clear();
    ps_.clear();
    ws_.clear();
    ys_.clear();
    dim_set_ = false;
    d_ = 0;
    for (auto& t : factors_) t.mixed.clear();
}

KernelRows::RoundCache KernelRows::prepare(std::span<const double> x) const {
    if (dim_set_ && x.size() != d_) throw InputError("datum dimension does not match the history");
    for (double v : x) {
        if (!std::isfinite(v)) throw InputError("datum is not finite");
    }
    const std::size_t n = size();
    RoundCache cache;
    cache.x.assign(x.begin(), x.end());
    cache.fixed.assign(m_, 0.0);
    cache.datum_factor.resize(factors_.size());
    for (std::size_t t = 0; t < factors_.size(); ++t) {
        const auto& term = factors_[t];
        auto& row = cache.datum_factor[t];
        row.resize(n);
        if (term.x.is_constant()) {
            std::fill(row.begin(), row.end(), term.x.value);
        } else {
            parallel_for(0, n, [&](std::size_t i) {
                row[i] = term.x(std::span<const double>(xs_).subspan(i * d_, d_), x);
            });
        }
        if (term.p.is_constant()) {
            for (std::size_t i = 0; i < n; ++i) {
                const double c = term.weight * term.p.value * row[i];
                for (std::size_t y = 0; y < m_; ++y) cache.fixed[y] += c * term.mixed[i * m_ + y];
            }
        }
    }
    return cache;
}

template <bool Parallel>
void KernelRows::accumulate_impl(const RoundCache& cache, std::span<const double> p, std::span<double> b,
                                 std::vector<double>& scratch) const {
    if (p.size() != m_ || b.size() != m_) throw InputError("candidate forecast has the wrong number of classes");
    const std::size_t n = size();
    auto loop = [](std::size_t begin, std::size_t end, auto&& f) {
        if constexpr (Parallel) {
            parallel_for(begin, end, f);
        } else {
            serial_for(begin, end, f);
        }
    };

    for (std::size_t y = 0; y < m_; ++y) b[y] += cache.fixed[y];

    for (std::size_t t = 0; t < factors_.size(); ++t) {
        const auto& term = factors_[t];
        if (term.p.is_constant()) continue;
        const auto& row = cache.datum_factor[t];
        scratch.resize(n);
        loop(0, n, [&](std::size_t i) {
            scratch[i] = row[i] * term.p(std::span<const double>(ps_).subspan(i * m_, m_), p);
        });
        // Serial reduction keeps the sum independent of the thread count.
        for (std::size_t i = 0; i < n; ++i) {
            const double c = term.weight * scratch[i];
            for (std::size_t y = 0; y < m_; ++y) b[y] += c * term.mixed[i * m_ + y];
        }
    }

    for (const auto& term : generics_) {
        scratch.resize(n * m_);
        loop(0, n, [&](std::size_t i) {
            const std::span<const double> xi = std::span<const double>(xs_).subspan(i * d_, d_);
            const std::span<const double> pi = std::span<const double>(ps_).subspan(i * m_, m_);
            for (std::size_t y = 0; y < m_; ++y) {
                double s = 0.0;
                for (std::size_t c = 0; c < m_; ++c) {
                    const double w = ws_[i * m_ + c];
                    if (w == 0.0) continue;
                    s += w * eval_kernel(term.spec, PointView{xi, pi, c}, PointView{cache.x, p, y});
                }
                scratch[i * m_ + y] = s;
            }
        });
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t y = 0; y < m_; ++y) b[y] += term.weight * scratch[i * m_ + y];
        }
    }
}

void KernelRows::accumulate(const RoundCache& cache, std::span<const double> p, std::span<double> b,
                            std::vector<double>& scratch) const {
    accumulate_impl<true>(cache, p, b, scratch);
}

void KernelRows::accumulate_serial(const RoundCache& cache, std::span<const double> p, std::span<double> b,
                                   std::vector<double>& scratch) const {
    accumulate_impl<false>(cache, p, b, scratch);
}

}  // namespace defcast
