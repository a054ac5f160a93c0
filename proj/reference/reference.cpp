#include "reference.hpp"

#include <algorithm>
#include <cmath>

#include "defcast/decision.hpp"
#include "defcast/errors.hpp"
#include "defcast/forecaster.hpp"

namespace defcast::reference {

namespace {

double four_term(const KernelSpec& spec, const ForecastPoint& z, std::span<const double> x, std::span<const double> p,
                 std::size_t y) {
    const std::size_t m = p.size();
    const std::span<const double> pi = z.p.weights();
    double t1 = eval_kernel(spec, z.view(), PointView{x, p, y});
    double t2 = 0.0;
    for (std::size_t a = 0; a < m; ++a) t2 += p[a] * eval_kernel(spec, z.view(), PointView{x, p, a});
    double t3 = 0.0;
    for (std::size_t b = 0; b < m; ++b) t3 += pi[b] * eval_kernel(spec, PointView{z.x, pi, b}, PointView{x, p, y});
    double t4 = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            t4 += p[a] * pi[b] * eval_kernel(spec, PointView{z.x, pi, b}, PointView{x, p, a});
        }
    }
    return t1 - t2 - t3 + t4;
}

double kernel_gain(const KernelSpec& spec, const std::vector<ForecastPoint>& history, std::span<const double> x,
                   std::span<const double> p, std::size_t y) {
    double s = 0.0;
    for (const auto& z : history) s += four_term(spec, z, x, p, y);
    return 2.0 * s;
}

}  // namespace

double gain(const KernelSpec& spec, const std::vector<ForecastPoint>& history, std::span<const double> x,
            const Simplex& p, std::size_t y) {
    return kernel_gain(spec, history, x, p.weights(), y);
}

double psi_inner(const KernelSpec& spec, const ForecastPoint& a, const ForecastPoint& b) {
    const std::size_t m = a.p.size();
    double s = 0.0;
    for (std::size_t u = 0; u < m; ++u) {
        const double wa = (u == a.y ? 1.0 : 0.0) - a.p[u];
        for (std::size_t v = 0; v < m; ++v) {
            const double wb = (v == b.y ? 1.0 : 0.0) - b.p[v];
            s += wa * wb * eval_kernel(spec, PointView{a.x, a.p.weights(), u}, PointView{b.x, b.p.weights(), v});
        }
    }
    return s;
}

double capital(const KernelSpec& spec, const std::vector<ForecastPoint>& history, const std::vector<double>& psi0) {
    double off_diagonal = 0.0;
    for (std::size_t i = 0; i < history.size(); ++i) {
        for (std::size_t j = 0; j < history.size(); ++j) {
            if (i == j) continue;
            off_diagonal += psi_inner(spec, history[i], history[j]);
            if (!psi0.empty()) off_diagonal += psi0[i] * psi0[j];
        }
    }
    return off_diagonal;
}

std::vector<Simplex> play_forecast(const KernelSpec& spec, const std::vector<std::vector<double>>& xs,
                                   const std::vector<std::size_t>& ys, double binary_tol) {
    std::vector<ForecastPoint> history;
    std::vector<Simplex> out;
    for (std::size_t n = 0; n < xs.size(); ++n) {
        const auto& x = xs[n];
        std::vector<double> p(2);
        auto s = [&](double q) {
            p[0] = 1.0 - q;
            p[1] = q;
            return (kernel_gain(spec, history, x, p, 1) - kernel_gain(spec, history, x, p, 0)) / 2.0;
        };
        const double q = binary_root(s, binary_tol);
        out.push_back(Simplex::binary(q));
        history.emplace_back(x, out.back(), ys[n]);
    }
    return out;
}

std::vector<DecideRound> play_decide(const KernelSpec& spec, const LossSpec& loss, double epsilon_floor,
                                     const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& ys,
                                     double binary_tol) {
    if (loss.classes() != 2) throw InputError("the reference decision game is binary");
    const DecisionConfig dc{loss, epsilon_floor};
    std::vector<ForecastPoint> history;
    std::vector<DecideRound> out;
    // Scalar channel psi0_i = lambda(G_i(P_i), y_i) - lambda(G_i(P_i), P_i).
    auto psi0 = [&](const ForecastPoint& z, std::size_t round) {
        const auto g = choice(loss, z.x, z.p, dc.epsilon(round));
        return loss.value(g, z.y) - (z.p[0] * loss.value(g, 0) + z.p[1] * loss.value(g, 1));
    };
    for (std::size_t n = 0; n < xs.size(); ++n) {
        const auto& x = xs[n];
        const double eps = dc.epsilon(n + 1);
        double scalar = 0.0;
        for (std::size_t i = 0; i < history.size(); ++i) scalar += psi0(history[i], i + 1);
        std::vector<double> p(2);
        auto merged = [&](std::size_t y) {
            const auto g = choice(loss, x, Simplex(p), eps);
            const double mean = p[0] * loss.value(g, 0) + p[1] * loss.value(g, 1);
            return kernel_gain(spec, history, x, p, y) + 2.0 * scalar * (loss.value(g, y) - mean);
        };
        auto s = [&](double q) {
            p[0] = 1.0 - q;
            p[1] = q;
            return (merged(1) - merged(0)) / 2.0;
        };
        const double q = binary_root(s, binary_tol);
        const Simplex forecast = Simplex::binary(q);
        out.push_back({forecast, choice(loss, x, forecast, eps)});
        history.emplace_back(x, forecast, ys[n]);
    }
    return out;
}

}  // namespace defcast::reference
