#include "defcast/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "defcast/errors.hpp"

namespace defcast {

namespace {

/// Evaluates B(x, P) and g(., P) for one round; owns the round cache.
class GainEvaluator {
public:
    GainEvaluator(const ForecastState& state, std::span<const double> x, const ScalarFeature* feature)
        : state_(state),
          feature_(feature),
          x_(x.begin(), x.end()),
          cache_(state.rows().prepare(x)),
          phi_(state.classes()),
          b_(state.classes()),
          pbuf_(state.classes()) {}

    std::size_t classes() const { return state_.classes(); }
    std::size_t evaluations() const { return evaluations_; }

    void b_vector(std::span<const double> p, std::span<double> b) {
        ++evaluations_;
        std::fill(b.begin(), b.end(), 0.0);
        state_.rows().accumulate(cache_, p, b, scratch_);
        const double a = state_.scalar_sum();
        if (feature_ != nullptr && a != 0.0) {
            (*feature_)(x_, p, phi_);
            for (std::size_t y = 0; y < b.size(); ++y) b[y] += a * phi_[y];
        }
    }

    void gains(std::span<const double> p, std::span<double> g) {
        b_vector(p, b_);
        double mean = 0.0;
        for (std::size_t y = 0; y < b_.size(); ++y) mean += p[y] * b_[y];
        for (std::size_t y = 0; y < b_.size(); ++y) g[y] = 2.0 * (b_[y] - mean);
    }

    double max_gain(std::span<const double> p) {
        std::vector<double>& g = gbuf_;
        g.resize(classes());
        gains(p, g);
        return *std::max_element(g.begin(), g.end());
    }

    /// Sum of squared positive parts: zero exactly on neutral forecasts.
    double excess(std::span<const double> p) {
        std::vector<double>& g = gbuf_;
        g.resize(classes());
        gains(p, g);
        double s = 0.0;
        for (double v : g) {
            if (v > 0.0) s += v * v;
        }
        return s;
    }

    double binary_s(double q) {
        pbuf_[0] = 1.0 - q;
        pbuf_[1] = q;
        b_vector(pbuf_, b_);
        return b_[1] - b_[0];
    }

private:
    const ForecastState& state_;
    const ScalarFeature* feature_;
    std::vector<double> x_;
    KernelRows::RoundCache cache_;
    std::vector<double> phi_;
    std::vector<double> b_;
    std::vector<double> pbuf_;
    std::vector<double> gbuf_;
    std::vector<double> scratch_;
    std::size_t evaluations_ = 0;
};

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

void compositions(std::size_t total, std::size_t parts, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        current.push_back(static_cast<int>(total));
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (std::size_t k = 0; k <= total; ++k) {
        current.push_back(static_cast<int>(k));
        compositions(total - k, parts - 1, current, out);
        current.pop_back();
    }
}

struct Candidate {
    std::vector<double> p;
    double h;
};

std::vector<double> to_point(std::span<const double> free, std::size_t m) {
    std::vector<double> full(m);
    double last = 1.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        full[i] = free[i];
        last -= free[i];
    }
    full[m - 1] = last;
    std::vector<double> out(m);
    project_to_simplex(full, out);
    return out;
}

/// Nelder-Mead on the free coordinates, minimizing the positive-part excess.
Candidate nelder_mead(GainEvaluator& ev, const std::vector<double>& start, double step, double tol,
                      std::size_t max_evals) {
    const std::size_t m = start.size();
    const std::size_t dim = m - 1;
    std::vector<std::vector<double>> simplex(dim + 1, std::vector<double>(start.begin(), start.end() - 1));
    for (std::size_t i = 0; i < dim; ++i) {
        simplex[i + 1][i] += (start[i] + step <= 1.0) ? step : -step;
    }
    std::vector<double> values(dim + 1);
    std::size_t evals = 0;
    Candidate best{start, ev.max_gain(start)};
    auto f = [&](const std::vector<double>& v) {
        ++evals;
        const auto p = to_point(v, m);
        const double e = ev.excess(p);
        const double h = ev.max_gain(p);
        if (h < best.h) best = {p, h};
        return e;
    };
    for (std::size_t i = 0; i <= dim; ++i) values[i] = f(simplex[i]);

    std::vector<std::size_t> order(dim + 1);
    while (evals < max_evals && best.h > tol) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t lo = order.front();
        const std::size_t hi = order.back();
        const std::size_t second = order[dim > 0 ? dim - 1 : 0];

        double spread = 0.0;
        for (std::size_t i = 0; i <= dim; ++i) {
            for (std::size_t k = 0; k < dim; ++k) spread = std::max(spread, std::abs(simplex[i][k] - simplex[lo][k]));
        }
        if (spread < 1e-15) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == hi) continue;
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / static_cast<double>(dim);
        }
        auto along = [&](double t) {
            std::vector<double> v(dim);
            for (std::size_t k = 0; k < dim; ++k) v[k] = centroid[k] + t * (simplex[hi][k] - centroid[k]);
            return v;
        };
        auto reflected = along(-1.0);
        const double fr = f(reflected);
        if (fr < values[lo]) {
            auto expanded = along(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[hi] = expanded;
                values[hi] = fe;
            } else {
                simplex[hi] = reflected;
                values[hi] = fr;
            }
        } else if (fr < values[second]) {
            simplex[hi] = reflected;
            values[hi] = fr;
        } else {
            auto contracted = fr < values[hi] ? along(-0.5) : along(0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, values[hi])) {
                simplex[hi] = contracted;
                values[hi] = fc;
            } else {
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == lo) continue;
                    for (std::size_t k = 0; k < dim; ++k)
                        simplex[i][k] = simplex[lo][k] + 0.5 * (simplex[i][k] - simplex[lo][k]);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    return best;
}

/// Newton iterations on g_y = 0 over the support of p (one equation is
/// implied by sum_y P(y) g(y, P) = 0).
Candidate newton_polish(GainEvaluator& ev, Candidate c, double tol) {
    const std::size_t m = c.p.size();
    for (int iter = 0; iter < 40 && c.h > tol; ++iter) {
        std::vector<std::size_t> support;
        for (std::size_t y = 0; y < m; ++y) {
            if (c.p[y] > 1e-12) support.push_back(y);
        }
        if (support.size() < 2) return c;
        const std::size_t k = support.size() - 1;
        const std::size_t last = support.back();

        auto residual = [&](const std::vector<double>& p) {
            std::vector<double> g(m);
            ev.gains(p, g);
            Eigen::VectorXd r(static_cast<Eigen::Index>(k));
            for (std::size_t j = 0; j < k; ++j) r[static_cast<Eigen::Index>(j)] = g[support[j]];
            return r;
        };
        auto shift = [&](const std::vector<double>& p, std::size_t j, double d) {
            std::vector<double> q = p;
            q[support[j]] += d;
            q[last] -= d;
            return q;
        };

        const Eigen::VectorXd r0 = residual(c.p);
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        for (std::size_t j = 0; j < k; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(c.p[support[j]]));
            const double d = (c.p[last] > h) ? h : -h;
            jac.col(static_cast<Eigen::Index>(j)) = (residual(shift(c.p, j, d)) - r0) / d;
        }
        const Eigen::VectorXd delta = jac.fullPivLu().solve(-r0);
        if (!delta.allFinite()) return c;

        bool improved = false;
        for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
            std::vector<double> q = c.p;
            for (std::size_t j = 0; j < k; ++j) {
                q[support[j]] += alpha * delta[static_cast<Eigen::Index>(j)];
                q[last] -= alpha * delta[static_cast<Eigen::Index>(j)];
            }
            std::vector<double> projected(m);
            project_to_simplex(q, projected);
            const double h = ev.max_gain(projected);
            if (h < c.h) {
                c = {projected, h};
                improved = true;
                break;
            }
        }
        if (!improved) return c;
    }
    return c;
}

Candidate refine(GainEvaluator& ev, const Candidate& start, double step, double tol) {
    Candidate c = start;
    if (c.h <= tol) return c;
    c = newton_polish(ev, c, tol);
    if (c.h <= tol) return c;
    Candidate nm = nelder_mead(ev, c.p, step, tol, 300 * c.p.size());
    if (nm.h < c.h) c = nm;
    if (c.h <= tol) return c;
    return newton_polish(ev, c, tol);
}

/// Extragradient iteration P <- proj(P + eta g(P)). Its fixed points are
/// exactly the neutral forecasts: g vanishes on the support and is
/// non-positive off it.
Candidate extragradient(GainEvaluator& ev, const std::vector<double>& start, double tol, std::size_t max_iter) {
    const std::size_t m = start.size();
    std::vector<double> p = start;
    std::vector<double> g(m), gh(m), half(m), q(m), next(m);
    ev.gains(p, g);
    Candidate best{p, *std::max_element(g.begin(), g.end())};
    double gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::abs(v));
    double eta = gnorm > 0.0 ? 0.1 / gnorm : 1.0;
    for (std::size_t iter = 0; iter < max_iter && best.h > tol; ++iter) {
        bool accepted = false;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t y = 0; y < m; ++y) q[y] = p[y] + eta * g[y];
            project_to_simplex(q, half);
            ev.gains(half, gh);
            double dp = 0.0;
            double dg = 0.0;
            for (std::size_t y = 0; y < m; ++y) {
                dp += (half[y] - p[y]) * (half[y] - p[y]);
                dg += (gh[y] - g[y]) * (gh[y] - g[y]);
            }
            if (dp == 0.0) return best;
            if (eta * std::sqrt(dg) <= 0.9 * std::sqrt(dp)) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) break;
        const double hh = *std::max_element(gh.begin(), gh.end());
        if (hh < best.h) best = {half, hh};
        for (std::size_t y = 0; y < m; ++y) q[y] = p[y] + eta * gh[y];
        project_to_simplex(q, next);
        p = next;
        ev.gains(p, g);
        const double h = *std::max_element(g.begin(), g.end());
        if (h < best.h) best = {p, h};
        eta *= 1.5;
    }
    return best;
}

Simplex solve_general(GainEvaluator& ev, const ForecastConfig& cfg, Certificate* cert) {
    const std::size_t m = ev.classes();
    const double tol = cfg.tol_neutral;
    auto finish = [&](const std::vector<double>& p, double h) {
        if (cert != nullptr) {
            cert->max_gain = h;
            cert->binary = false;
            cert->evaluations = ev.evaluations();
        }
        return Simplex(p);
    };

    const Simplex uniform = Simplex::uniform(m);
    const double hu = ev.max_gain(uniform.weights());
    if (hu <= tol) return finish(uniform.vec(), hu);

    Candidate local = extragradient(ev, uniform.vec(), tol, 400);
    if (local.h > tol) local = newton_polish(ev, local, tol);
    if (local.h <= tol) return finish(local.p, local.h);

    std::size_t resolution = std::max<std::size_t>(cfg.grid_resolution, 1);
    while (resolution > 1 && binomial(resolution + m - 1, m - 1) > static_cast<double>(cfg.grid_budget)) --resolution;

    std::vector<std::vector<int>> grid;
    std::vector<int> scratch;
    compositions(resolution, m, scratch, grid);
    // Closest to uniform first, ties broken lexicographically.
    auto spread = [&](const std::vector<int>& c) {
        long long s = 0;
        for (int k : c) {
            const long long d = static_cast<long long>(m) * k - static_cast<long long>(resolution);
            s += d * d;
        }
        return s;
    };
    std::stable_sort(grid.begin(), grid.end(), [&](const auto& a, const auto& b) {
        const long long sa = spread(a);
        const long long sb = spread(b);
        if (sa != sb) return sa < sb;
        return a < b;
    });

    constexpr std::size_t kStarts = 3;
    std::vector<Candidate> best;
    std::vector<double> p(m);
    for (const auto& c : grid) {
        for (std::size_t y = 0; y < m; ++y) p[y] = static_cast<double>(c[y]) / static_cast<double>(resolution);
        const double h = ev.max_gain(p);
        if (h <= tol) return finish(p, h);
        if (best.size() < kStarts || h < best.back().h) {
            best.push_back({p, h});
            std::stable_sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.h < b.h; });
            if (best.size() > kStarts) best.pop_back();
        }
    }

    double step = 1.0 / static_cast<double>(resolution);
    Candidate overall = best.front();
    for (const auto& start : best) {
        Candidate c = refine(ev, start, step, tol);
        if (c.h <= tol) return finish(c.p, c.h);
        if (c.h < overall.h) overall = c;
    }

    // Zoom: successively finer local lattices around the best point so far.
    const int radius = m <= 4 ? 2 : 1;
    const std::size_t dim = m - 1;
    for (std::size_t level = 0; level < cfg.max_refinements; ++level) {
        step *= 0.5;
        const std::size_t side = static_cast<std::size_t>(2 * radius + 1);
        std::size_t count = 1;
        for (std::size_t k = 0; k < dim; ++k) count *= side;
        Candidate local = overall;
        std::vector<double> q(m);
        for (std::size_t code = 0; code < count; ++code) {
            std::size_t rest = code;
            double moved = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const int offset = static_cast<int>(rest % side) - radius;
                rest /= side;
                q[k] = overall.p[k] + step * offset;
                moved += step * offset;
            }
            q[m - 1] = overall.p[m - 1] - moved;
            std::vector<double> projected(m);
            project_to_simplex(q, projected);
            const double h = ev.max_gain(projected);
            if (h < local.h) local = {projected, h};
        }
        overall = local;
        if (overall.h <= tol) return finish(overall.p, overall.h);
        Candidate c = refine(ev, overall, step, tol);
        if (c.h < overall.h) overall = c;
        if (overall.h <= tol) return finish(overall.p, overall.h);
    }
    throw SolverFailure("no neutral forecast found; best max gain " + std::to_string(overall.h));
}

}  // namespace

ForecastState::ForecastState(KernelSpec spec, std::size_t classes, ForecastConfig config)
    : m_(classes), config_(config), rows_(std::move(spec), classes) {
    if (!(config_.tol_neutral > 0.0) || !(config_.binary_tol > 0.0))
        throw InputError("solver tolerances must be positive");
}

ObserveResult ForecastState::observe(std::span<const double> x, const Simplex& p, std::size_t y,
                                     const ScalarFeature* feature) {
    if (y >= m_) throw InputError("observation index out of range");
    if (p.size() != m_) throw InputError("forecast has the wrong number of classes");

    ObserveResult result;
    result.gain = neutrality_gain(*this, x, p, y, feature);

    std::vector<double> w(m_);
    for (std::size_t c = 0; c < m_; ++c) w[c] = (c == y ? 1.0 : 0.0) - p[c];
    double kernel_sq = 0.0;
    for (std::size_t a = 0; a < m_; ++a) {
        for (std::size_t b = 0; b < m_; ++b) {
            kernel_sq += w[a] * w[b] * eval_kernel(spec(), PointView{x, p.weights(), a}, PointView{x, p.weights(), b});
        }
    }
    result.psi_kernel_norm = std::sqrt(std::max(kernel_sq, 0.0));
    if (feature != nullptr) {
        std::vector<double> phi(m_);
        (*feature)(x, p.weights(), phi);
        double mean = 0.0;
        for (std::size_t c = 0; c < m_; ++c) mean += p[c] * phi[c];
        result.psi_scalar = phi[y] - mean;
    }

    rows_.append(PointView{x, p.weights(), y});
    history_.emplace_back(std::vector<double>(x.begin(), x.end()), p, y);
    scalar_sum_ += result.psi_scalar;
    capital_ += result.gain;
    psi_norm_sq_sum_ += kernel_sq + result.psi_scalar * result.psi_scalar;
    return result;
}

void ForecastState::reset() {
    rows_.clear();
    history_.clear();
    scalar_sum_ = 0.0;
    capital_ = 0.0;
    psi_norm_sq_sum_ = 0.0;
}

std::vector<double> neutrality_gains(const ForecastState& state, std::span<const double> x, const Simplex& p,
                                     const ScalarFeature* feature) {
    if (p.size() != state.classes()) throw InputError("forecast has the wrong number of classes");
    GainEvaluator ev(state, x, feature);
    std::vector<double> g(state.classes());
    ev.gains(p.weights(), g);
    return g;
}

double neutrality_gain(const ForecastState& state, std::span<const double> x, const Simplex& p, std::size_t y,
                       const ScalarFeature* feature) {
    if (y >= state.classes()) throw InputError("observation index out of range");
    return neutrality_gains(state, x, p, feature)[y];
}

double binary_root(const std::function<double(double)>& s, double tol, Certificate* cert) {
    std::size_t evals = 0;
    auto eval = [&](double q) {
        ++evals;
        return s(q);
    };
    auto done = [&](double q, double sq, bool boundary) {
        if (cert != nullptr) {
            cert->binary = true;
            cert->binary_s = sq;
            cert->boundary = boundary;
            cert->evaluations = evals;
            cert->max_gain = std::max(2.0 * (1.0 - q) * sq, -2.0 * q * sq);
        }
        return q;
    };

    const double mid = eval(0.5);
    if (std::abs(mid) <= tol) return done(0.5, mid, false);

    constexpr int kScan = 64;
    std::vector<double> values(kScan + 1);
    for (int j = 0; j <= kScan; ++j) values[j] = (j == kScan / 2) ? mid : eval(j / double(kScan));

    // Grid zero nearest the midpoint (lower p on ties).
    int zero = -1;
    for (int j = 0; j <= kScan; ++j) {
        if (std::abs(values[j]) <= tol && (zero < 0 || std::abs(j - kScan / 2) < std::abs(zero - kScan / 2))) zero = j;
    }
    if (zero >= 0) return done(zero / double(kScan), values[zero], false);

    int bracket = -1;
    for (int j = 0; j < kScan; ++j) {
        if ((values[j] > 0.0) != (values[j + 1] > 0.0)) {
            // distance of the bracket centre to 1/2, in half-steps
            const int dist = std::abs(2 * j + 1 - kScan);
            if (bracket < 0 || dist < std::abs(2 * bracket + 1 - kScan)) bracket = j;
        }
    }
    if (bracket < 0) {
        return values[0] > 0.0 ? done(1.0, values[kScan], true) : done(0.0, values[0], true);
    }

    double lo = bracket / double(kScan);
    double hi = (bracket + 1) / double(kScan);
    double slo = values[bracket];
    double shi = values[bracket + 1];
    for (int iter = 0; iter < 200; ++iter) {
        const double m = lo + 0.5 * (hi - lo);
        if (m <= lo || m >= hi) break;
        const double sm = eval(m);
        if (std::abs(sm) <= tol) return done(m, sm, false);
        if ((sm > 0.0) == (slo > 0.0)) {
            lo = m;
            slo = sm;
        } else {
            hi = m;
            shi = sm;
        }
    }
    return std::abs(slo) <= std::abs(shi) ? done(lo, slo, false) : done(hi, shi, false);
}

double k29_binary_root(const ForecastState& state, std::span<const double> x, const ScalarFeature* feature,
                       Certificate* certificate) {
    if (state.classes() != 2) throw InputError("binary root finder needs two classes");
    GainEvaluator ev(state, x, feature);
    return binary_root([&](double q) { return ev.binary_s(q); }, state.config().binary_tol, certificate);
}

Simplex defensive_forecast(const ForecastState& state, std::span<const double> x, const ScalarFeature* feature,
                           Certificate* certificate) {
    Certificate local;
    Certificate* cert = certificate != nullptr ? certificate : &local;
    if (state.classes() == 2) {
        const double q = k29_binary_root(state, x, feature, cert);
        if (cert->max_gain > state.config().tol_neutral) {
            throw SolverFailure("binary root finder could not neutralize: max gain " + std::to_string(cert->max_gain),
                                state.size() + 1);
        }
        return Simplex::binary(q);
    }
    GainEvaluator ev(state, x, feature);
    try {
        return solve_general(ev, state.config(), cert);
    } catch (const SolverFailure& e) {
        throw SolverFailure(e.what(), state.size() + 1);
    }
}

}  // namespace defcast
