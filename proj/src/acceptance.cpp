#include "defcast/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "defcast/config.hpp"
#include "defcast/decision.hpp"
#include "defcast/errors.hpp"
#include "defcast/forecaster.hpp"
#include "defcast/game.hpp"
#include "defcast/metrics.hpp"
#include "defcast/skeptic.hpp"
#include "defcast/stream.hpp"
#include "reference.hpp"

namespace defcast::acceptance {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kTolNeutral = 1e-6;
constexpr double kTolBinary = 1e-9;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t m) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(m);
    double s = 0.0;
    for (double& v : w) s += (v = e(rng));
    for (double& v : w) v /= s;
    std::vector<double> out(m);
    project_to_simplex(w, out);
    return out;
}

struct StreamCase {
    std::string name;
    StreamSpec spec;
    bool seeded;
};

std::vector<StreamCase> neutrality_streams() {
    return {
        {"alternating_parity", StreamSpec::alternating_parity(), false},
        {"bernoulli(0.3)", StreamSpec::bernoulli(0.3, 0), true},
        {"bernoulli(0.5)", StreamSpec::bernoulli(0.5, 0), true},
        {"bernoulli(0.7)", StreamSpec::bernoulli(0.7, 0), true},
        {"logistic_rule", StreamSpec::logistic({{1.5, -1.0}}, {0.2}, 0), true},
        {"sign_flip_adversary", StreamSpec::sign_flip_adversary(), false},
    };
}

struct DefensiveRun {
    std::string stream;
    std::string label;
    Transcript t;
    double max_gain = -std::numeric_limits<double>::infinity();
    double max_abs_s = 0.0;
    std::size_t boundary = 0;
    std::size_t bad = 0;
    double max_excess = -std::numeric_limits<double>::infinity();  // max_n S_n - n tol
    double max_mixture_step = -std::numeric_limits<double>::infinity();
    double reference_gap = 0.0;
    double seconds = 0.0;
};

KernelSpec defensive_kernel() { return KernelSpec::gaussian(1.0); }

DefensiveRun play_defensive(const StreamCase& c, std::uint64_t seed, std::size_t rounds) {
    const auto t0 = Clock::now();
    StreamSpec spec = c.spec;
    spec.seed = seed;
    auto stream = make_stream(spec);
    const KernelSpec kernel = defensive_kernel();
    ForecastConfig fc;
    fc.tol_neutral = kTolNeutral;
    fc.binary_tol = kTolBinary;
    ForecastState state(kernel, 2, fc);
    MixtureSkeptic mixture(2.0 * imbedding_constant(kernel));

    DefensiveRun run;
    run.stream = c.name;
    run.label = c.seeded ? c.name + " seed " + std::to_string(seed) : c.name;
    run.t.metadata = {{"stream", stream_to_json(spec)}, {"kernel", kernel_to_json(kernel)}};
    for (std::size_t n = 1; n <= rounds; ++n) {
        const std::vector<double> x = stream->datum(n);
        Certificate cert;
        const Simplex p = defensive_forecast(state, x, nullptr, &cert);

        const auto g = neutrality_gains(state, x, p);
        const double h = *std::max_element(g.begin(), g.end());
        run.max_gain = std::max(run.max_gain, h);
        bool ok = h <= kTolNeutral;
        if (cert.boundary) {
            ++run.boundary;
            ok = ok && ((p[1] == 1.0 && cert.binary_s > 0.0) || (p[1] == 0.0 && cert.binary_s < 0.0));
        } else {
            run.max_abs_s = std::max(run.max_abs_s, std::abs(cert.binary_s));
            ok = ok && std::abs(cert.binary_s) <= kTolBinary;
        }
        if (n % 250 == 0) {
            for (std::size_t y = 0; y < 2; ++y) {
                const double r = reference::gain(kernel, state.history(), x, p, y);
                run.reference_gap = std::max(run.reference_gap, std::abs(r - g[y]));
                ok = ok && r <= kTolNeutral + 1e-9;
            }
        }
        if (!ok) ++run.bad;

        const std::size_t y = stream->outcome(n, p, nullptr);
        const double before = mixture.capital();
        const auto res = state.observe(x, p, y);
        mixture.step(res.gain);
        run.max_mixture_step = std::max(run.max_mixture_step, mixture.capital() - before);
        run.max_excess = std::max(run.max_excess, state.capital() - static_cast<double>(n) * kTolNeutral);

        RoundRecord rec;
        rec.n = n;
        rec.x = x;
        rec.p = p.vec();
        rec.y = y;
        rec.cert = h;
        rec.cap["quadratic"] = state.capital();
        rec.cap["mixture"] = mixture.capital();
        run.t.rounds.push_back(std::move(rec));
    }
    run.seconds = seconds_since(t0);
    return run;
}

class Context {
public:
    explicit Context(const Options& o) : options_(o) {}

    std::size_t rounds(std::size_t fallback) const { return options_.rounds > 0 ? options_.rounds : fallback; }
    std::size_t seeds(std::size_t fallback) const { return options_.seeds > 0 ? options_.seeds : fallback; }

    const std::vector<DefensiveRun>& defensive() {
        if (!built_) {
            const std::size_t n = rounds(2000);
            for (const auto& c : neutrality_streams()) {
                // Deterministic streams give the same game for every seed.
                const std::size_t count = c.seeded ? seeds(5) : 1;
                for (std::size_t s = 1; s <= count; ++s) runs_.push_back(play_defensive(c, s, n));
            }
            built_ = true;
        }
        return runs_;
    }

private:
    Options options_;
    bool built_ = false;
    std::vector<DefensiveRun> runs_;
};

Result neutrality(Context& ctx) {
    Result r{1, "neutrality", true, "", 0.0};
    const auto& runs = ctx.defensive();
    double max_gain = -std::numeric_limits<double>::infinity();
    double max_s = 0.0;
    double ref_gap = 0.0;
    std::size_t boundary = 0;
    std::size_t bad = 0;
    std::size_t rounds = 0;
    std::map<std::string, double> per_stream;
    for (const auto& run : runs) {
        max_gain = std::max(max_gain, run.max_gain);
        max_s = std::max(max_s, run.max_abs_s);
        ref_gap = std::max(ref_gap, run.reference_gap);
        boundary += run.boundary;
        bad += run.bad;
        rounds += run.t.size();
        per_stream[run.stream] += run.seconds;
        if (run.bad > 0) r.detail += "[" + run.label + ": " + std::to_string(run.bad) + " bad rounds] ";
    }
    double slowest = 0.0;
    for (const auto& [name, s] : per_stream) slowest = std::max(slowest, s);
    r.passed = bad == 0;
    r.detail += std::to_string(runs.size()) + " runs, " + std::to_string(rounds) + " rounds; max gain " +
                num(max_gain) + " (tol 1e-06), max interior |S| " + num(max_s) + " (tol 1e-09), " +
                std::to_string(boundary) + " boundary rounds, reference gap " + num(ref_gap) +
                ", slowest stream " + num(slowest) + " s";
    return r;
}

Result theorem4(Context& ctx) {
    Result r{2, "theorem4", true, "", 0.0};
    const auto& runs = ctx.defensive();
    double max_ratio = 0.0;
    std::size_t checked = 0;
    std::size_t failed = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& run = runs[k];
        const KernelSpec kernel = defensive_kernel();
        const double c = imbedding_constant(kernel);
        const double n = static_cast<double>(run.t.size());
        std::mt19937_64 rng(1000 + k);
        std::uniform_int_distribution<std::size_t> count(1, 5);
        std::uniform_int_distribution<std::size_t> pick(0, run.t.size() - 1);
        std::uniform_int_distribution<std::size_t> cls(0, 1);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int f = 0; f < 20; ++f) {
            const std::size_t j = count(rng);
            std::vector<ForecastPoint> anchors;
            std::vector<double> coeffs;
            for (std::size_t a = 0; a < j; ++a) {
                std::vector<double> x = run.t.rounds[pick(rng)].x;
                for (double& v : x) v += 0.25 * normal(rng);
                anchors.emplace_back(std::move(x), Simplex(random_simplex(rng, 2)), cls(rng));
                coeffs.push_back(normal(rng));
            }
            const TestFunction fn(kernel, std::move(anchors), std::move(coeffs));
            const Discrepancy d = kernel_discrepancy(run.t, fn);
            // |<f, sum Psi>| <= |f| sqrt(sum |Psi|^2 + S_N) with S_N <= N tol.
            const double limit = fn.norm() * std::sqrt(4.0 * c * c * n + n * kTolNeutral);
            ++checked;
            if (!(d.statistic <= limit)) ++failed;
            max_ratio = std::max(max_ratio, d.ratio);
        }
    }
    r.passed = failed == 0;
    r.detail = std::to_string(checked) + " (run, f) pairs, " + std::to_string(failed) +
               " over the bound; max statistic / (2 c_F |f| sqrt N) = " + num(max_ratio);
    return r;
}

Result capital(Context& ctx) {
    Result r{3, "capital", true, "", 0.0};
    const auto& runs = ctx.defensive();
    double worst_excess = -std::numeric_limits<double>::infinity();
    double ref_gap = 0.0;
    std::map<std::string, bool> seen;
    for (const auto& run : runs) {
        worst_excess = std::max(worst_excess, run.max_excess);
        if (run.max_excess > 0.0) r.passed = false;
        if (seen[run.stream]) continue;
        seen[run.stream] = true;
        // Full Gram recomputation on the first run of each stream.
        std::vector<ForecastPoint> history;
        for (const auto& rec : run.t.rounds) history.emplace_back(rec.x, Simplex(rec.p), rec.y);
        const double full = reference::capital(defensive_kernel(), history);
        const double cached = run.t.rounds.back().cap.at("quadratic");
        const double gap = std::abs(full - cached);
        ref_gap = std::max(ref_gap, gap);
        if (gap > 1e-6 * std::max(1.0, std::abs(full))) r.passed = false;
    }

    const std::size_t n = ctx.rounds(2000);
    const std::size_t seeds = std::max<std::size_t>(ctx.seeds(20), 20);
    const KernelSpec k29 =
        KernelSpec::product(CoordinateKernel::constant(), CoordinateKernel::constant(), ClassKernel::indicator(1));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double oracle_gap = 0.0;
    const Simplex biased = Simplex::binary(0.9);
    for (std::size_t s = 1; s <= seeds; ++s) {
        auto stream = make_stream(StreamSpec::bernoulli(0.5, 500 + s));
        QuadraticSkeptic skeptic(k29, 2);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const auto x = stream->datum(i);
            const std::size_t y = stream->outcome(i, biased, nullptr);
            skeptic.step(x, biased, y);
            const double d = static_cast<double>(y) - 0.9;
            sum += d;
            sum_sq += d * d;
        }
        const double oracle = sum * sum - sum_sq;
        oracle_gap = std::max(oracle_gap, std::abs(skeptic.capital() - oracle) / std::max(1.0, std::abs(oracle)));
        const double ratio = skeptic.capital() / (static_cast<double>(n) * static_cast<double>(n));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    if (!(lo >= 0.1 && hi <= 0.25) || oracle_gap > 1e-9) r.passed = false;
    r.detail = "max_n (S_n - n tol) over defensive runs " + num(worst_excess) + " (need <= 0), full-Gram gap " +
               num(ref_gap) + "; constant 0.9 on fair coins: S_N/N^2 in [" + num(lo) + ", " + num(hi) +
               "] over " + std::to_string(seeds) + " seeds (need [0.1, 0.25]), oracle gap " + num(oracle_gap);
    return r;
}

struct RegretCase {
    std::string name;
    LossSpec loss;
    StreamSpec stream;
    double xlo;
    double xhi;
    std::vector<std::pair<std::string, PredictionRule>> rules;
};

KernelSpec decision_kernel() {
    const auto local = KernelSpec::product(CoordinateKernel::gaussian(1.0), CoordinateKernel::constant(),
                                           ClassKernel::kronecker());
    const auto flat =
        KernelSpec::product(CoordinateKernel::constant(), CoordinateKernel::constant(), ClassKernel::kronecker());
    return KernelSpec::weighted_sum({{1.0, local}, {1.0, flat}});
}

std::vector<RegretCase> regret_cases() {
    using R = PredictionRule;
    return {
        {"absolute",
         LossSpec::absolute(),
         StreamSpec::bernoulli(0.7, 11),
         0.0,
         1.0,
         {{"const 0", R::constant({0.0})},
          {"const 0.5", R::constant({0.5})},
          {"const 1", R::constant({1.0})},
          {"logistic", R::logistic({{2.0}}, {-0.5})}}},
        {"quadratic",
         LossSpec::quadratic(),
         StreamSpec::logistic({{2.5}}, {0.5}, 12),
         -1.0,
         1.0,
         {{"const 0.5", R::constant({0.5})},
          {"const 0.7", R::constant({0.7})},
          {"logistic (true law)", R::logistic({{2.5}}, {0.5})}}},
        {"brier",
         LossSpec::brier(3),
         StreamSpec::categorical({0.2, 0.3, 0.5}, 13),
         0.0,
         1.0,
         {{"uniform", R::constant({1.0 / 3, 1.0 / 3, 1.0 / 3})},
          {"true probs", R::constant({0.2, 0.3, 0.5})},
          {"softmax", R::logistic({{1.0}, {0.0}, {-1.0}}, {0.0, 0.2, 0.6})}}},
        {"cover",
         LossSpec::cover(2, 0.5, 2.0),
         StreamSpec::categorical({0.1, 0.3, 0.2, 0.4}, 14),
         0.0,
         1.0,
         {{"half-half", R::constant({0.5, 0.5})},
          {"all stock 2", R::constant({0.0, 1.0})},
          {"softmax", R::logistic({{1.0}, {-1.0}}, {0.0, 0.5})}}},
    };
}

Result regret_suite(Context& ctx) {
    Result r{4, "regret", true, "", 0.0};
    const std::size_t n = ctx.rounds(2000);
    const KernelSpec kernel = decision_kernel();
    const double c_f = imbedding_constant(kernel);
    std::ostringstream detail;
    double worst_bound_ratio = -std::numeric_limits<double>::infinity();
    double worst_growth = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> horizons;
    for (std::size_t h = n / 8; h <= n && h > 0; h *= 2) horizons.push_back(h);

    for (const auto& c : regret_cases()) {
        RunConfig cfg;
        cfg.mode = Mode::decide;
        cfg.rounds = n;
        cfg.stream = c.stream;
        cfg.kernel = kernel;
        cfg.loss = c.loss;
        const Transcript t = run_game(cfg);
        const std::size_t m = c.loss.classes();

        for (const auto& [rule_name, rule] : c.rules) {
            // Representer fit of lambda_D(x, y) = lambda(D(x), y) on a grid.
            const std::size_t per_class = (200 + m - 1) / m;
            std::vector<ForecastPoint> anchors;
            std::vector<double> targets;
            for (std::size_t i = 0; i < per_class; ++i) {
                const double x = c.xlo + (c.xhi - c.xlo) * static_cast<double>(i) / static_cast<double>(per_class - 1);
                const auto d = rule(std::vector<double>{x});
                for (std::size_t y = 0; y < m; ++y) {
                    anchors.emplace_back(std::vector<double>{x}, Simplex::uniform(m), y);
                    targets.push_back(c.loss.value(d, y));
                }
            }
            const TestFunction fit = fit_representer(kernel, std::move(anchors), targets, 1e-6);
            double residual = 0.0;
            const Simplex u = Simplex::uniform(m);
            for (const auto& rec : t.rounds) {
                const auto d = rule(rec.x);
                for (std::size_t y = 0; y < m; ++y) {
                    const double target = c.loss.value(d, y);
                    residual = std::max(residual, std::abs(fit(PointView{rec.x, u.weights(), y}) - target));
                }
            }

            std::vector<double> regrets;
            for (std::size_t h : horizons) {
                Transcript prefix;
                prefix.rounds.assign(t.rounds.begin(), t.rounds.begin() + static_cast<std::ptrdiff_t>(h));
                const double eta = 2.0 * residual * std::sqrt(static_cast<double>(h));
                const RegretReport rep = regret(prefix, rule, c.loss, c_f, fit.norm() + eta);
                regrets.push_back(rep.regret);
                worst_bound_ratio = std::max(worst_bound_ratio, rep.regret / rep.bound);
                if (!(rep.regret <= rep.bound)) {
                    r.passed = false;
                    detail << "[" << c.name << " vs " << rule_name << " N=" << h << ": regret " << num(rep.regret)
                           << " > bound " << num(rep.bound) << "] ";
                }
            }
            for (std::size_t i = 1; i < regrets.size(); ++i) {
                const double growth = regrets[i] / std::max(regrets[i - 1], 1.0);
                worst_growth = std::max(worst_growth, growth);
                if (!(growth <= 1.7)) {
                    r.passed = false;
                    detail << "[" << c.name << " vs " << rule_name << ": regret(" << horizons[i] << ")/regret("
                           << horizons[i - 1] << ") = " << num(growth) << "] ";
                }
            }
            detail << c.name << "/" << rule_name << ": regret(" << n << ")=" << num(regrets.back()) << " |fit|="
                   << num(fit.norm()) << " r=" << num(residual) << "; ";
        }
    }
    r.detail = detail.str() + "max regret/bound " + num(worst_bound_ratio) + ", max growth ratio " + num(worst_growth) +
               " (need <= 1.7)";
    return r;
}

Result hoeffding(Context& ctx) {
    Result r{5, "hoeffding", true, "", 0.0};
    const std::size_t n = ctx.rounds(1000);
    const std::size_t plays = std::max<std::size_t>(ctx.seeds(100), 100);
    std::size_t inside = 0;
    double worst = -std::numeric_limits<double>::infinity();
    const PredictionRule rule = PredictionRule::logistic({{1.5}}, {0.0});
    for (std::size_t s = 1; s <= plays; ++s) {
        RunConfig cfg;
        cfg.mode = Mode::decide;
        cfg.rounds = n;
        cfg.seed = 7000 + s;
        cfg.stream = StreamSpec::logistic({{2.0}}, {-0.5}, 0);
        cfg.kernel = decision_kernel();
        cfg.loss = LossSpec::absolute();
        cfg.randomize = true;
        cfg.rule = rule;
        const Transcript t = run_game(cfg);
        const HoeffdingReport rep = hoeffding_band(t, rule, LossSpec::absolute(), 0.01);
        if (rep.deviation <= rep.band) ++inside;
        worst = std::max(worst, rep.deviation / rep.band);
    }
    r.passed = inside >= (plays * 95 + 99) / 100;
    r.detail = std::to_string(inside) + "/" + std::to_string(plays) +
               " plays within the delta=0.01 band (need >= 95%); max deviation/band " + num(worst);
    return r;
}

/// Minimum expected loss over a brute-force grid of about 1e4 predictions,
/// with the grid's worst-case distance to any prediction.
std::pair<double, double> grid_minimum(const LossSpec& loss, const Simplex& p) {
    const std::size_t d = loss.prediction_dim();
    if (d == 1 || (loss.kind() == LossSpec::Kind::cover && loss.stocks() == 2)) {
        constexpr std::size_t kPoints = 10000;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j <= kPoints; ++j) {
            const double t = static_cast<double>(j) / kPoints;
            std::vector<double> g = d == 1 ? std::vector<double>{t} : std::vector<double>{t, 1.0 - t};
            best = std::min(best, expected_loss(loss, g, p));
        }
        return {best, (d == 1 ? 1.0 : 2.0) / kPoints};
    }
    std::size_t res = 1;
    auto count = [&](std::size_t r) {
        double c = 1.0;
        for (std::size_t i = 1; i < d; ++i) c = c * static_cast<double>(r + i) / static_cast<double>(i);
        return c;
    };
    while (count(res + 1) <= 10000.0) ++res;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> k(d, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i + 1 == d) {
            k[i] = left;
            std::vector<double> g(d);
            for (std::size_t j = 0; j < d; ++j) g[j] = static_cast<double>(k[j]) / static_cast<double>(res);
            std::vector<double> q(d);
            project_to_simplex(g, q);
            best = std::min(best, expected_loss(loss, q, p));
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            k[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, res);
    return {best, static_cast<double>(d - 1) / static_cast<double>(res)};
}

Result choice_suite(Context&) {
    Result r{6, "choice", true, "", 0.0};
    const std::vector<LossSpec> losses{LossSpec::absolute(), LossSpec::quadratic(), LossSpec::brier(3),
                                       LossSpec::cover(2, 0.5, 2.0), LossSpec::cover(3, 0.5, 2.0)};
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> which(0, losses.size() - 1);
    std::uniform_int_distribution<int> level(1, 40);
    std::size_t failed = 0;
    double worst = -std::numeric_limits<double>::infinity();
    const std::vector<double> x{0.0};
    for (int i = 0; i < 1000; ++i) {
        const LossSpec& loss = losses[which(rng)];
        const Simplex p(random_simplex(rng, loss.classes()));
        const double eps = std::ldexp(1.0, -level(rng));
        const auto g = choice(loss, x, p, eps);
        const double got = expected_loss(loss, g, p);
        const auto [best, spacing] = grid_minimum(loss, p);
        const double slack = loss.lipschitz() * spacing;
        worst = std::max(worst, (got - best) / (eps + slack));
        if (!(got <= best + eps + slack)) ++failed;
    }
    std::size_t exact_bad = 0;
    for (int n = 1; n <= 40; ++n) {
        const double eps = std::ldexp(1.0, -n);
        if (choice(LossSpec::absolute(), x, Simplex::binary(0.2), eps)[0] != 0.0) ++exact_bad;
        if (choice(LossSpec::absolute(), x, Simplex::binary(0.7), eps)[0] != 1.0) ++exact_bad;
    }
    r.passed = failed == 0 && exact_bad == 0;
    r.detail = "1000 random cases, " + std::to_string(failed) + " outside eps + grid slack (max excess ratio " +
               num(worst) + "); P(1) in {0.2, 0.7} exact for eps = 2^-1..2^-40: " +
               (exact_bad == 0 ? std::string("yes") : std::to_string(exact_bad) + " misses");
    return r;
}

Result calibration(Context& ctx) {
    Result r{7, "calibration", true, "", 0.0};
    const std::size_t n = ctx.rounds(10000);
    RunConfig cfg;
    cfg.mode = Mode::forecast;
    cfg.rounds = n;
    cfg.stream = StreamSpec::alternating_parity();
    cfg.kernel = KernelSpec::product(CoordinateKernel::gaussian(0.5), CoordinateKernel::gaussian(1.0),
                                     ClassKernel::kronecker());
    const Transcript t = run_game(cfg);
    double worst = 0.0;
    for (std::size_t parity = 0; parity < 2; ++parity) {
        double freq = 0.0;
        std::size_t count = 0;
        for (std::size_t i = n / 2; i < n; ++i) {
            if (t.rounds[i].n % 2 != parity) continue;
            freq += static_cast<double>(t.rounds[i].y);
            ++count;
        }
        freq /= static_cast<double>(count);
        double dev = 0.0;
        for (std::size_t i = n / 2; i < n; ++i) {
            if (t.rounds[i].n % 2 != parity) continue;
            dev += std::abs(t.rounds[i].p[1] - freq);
        }
        worst = std::max(worst, dev / static_cast<double>(count));
    }

    RunConfig flat = cfg;
    flat.mode = Mode::test;
    flat.forecast = std::vector<double>{0.5, 0.5};
    const Transcript ft = run_game(flat);
    const auto bins = calibration_bins(ft, 0.1, 1);
    const bool single = bins.size() == 1 && bins[0].deviation == 0.0;
    r.passed = worst <= 0.05 && single;
    r.detail = "parity-group mean |P_n(1) - frequency| over the last half " + num(worst) +
               " (need <= 0.05); constant 1/2 forecaster: " + std::to_string(bins.size()) + " bin(s), deviation " +
               (bins.empty() ? std::string("n/a") : num(bins[0].deviation));
    return r;
}

Result mixture(Context& ctx) {
    Result r{8, "mixture", true, "", 0.0};
    const double initial = MixtureSkeptic(2.0).capital();
    const double pi2_6 = 1.6449340668482264;
    const double gap = std::abs(initial - pi2_6);
    double worst_step = -std::numeric_limits<double>::infinity();
    double worst_level = 0.0;
    for (const auto& run : ctx.defensive()) {
        worst_step = std::max(worst_step, run.max_mixture_step);
        worst_level = std::max(worst_level, run.t.rounds.back().cap.at("mixture") - pi2_6);
    }
    r.passed = gap <= 1e-12 && worst_step <= kTolNeutral;
    r.detail = "initial capital - pi^2/6 = " + num(initial - pi2_6) + "; max one-round increase " + num(worst_step) +
               " (tol 1e-06), max final capital - pi^2/6 " + num(worst_level);
    return r;
}

Result oracle(Context&) {
    Result r{9, "oracle", true, "", 0.0};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<std::size_t> dims(1, 3);
    std::size_t mismatched = 0;
    for (int game = 0; game < 100; ++game) {
        const double sigma = 0.5 + 0.75 * (unit(rng) + 1.0);
        KernelSpec spec = KernelSpec::gaussian(sigma);
        switch (kind(rng)) {
            case 0:
                break;
            case 1:
                spec = KernelSpec::product(CoordinateKernel::gaussian(sigma), CoordinateKernel::gaussian(1.0),
                                           ClassKernel::kronecker());
                break;
            case 2:
                spec = KernelSpec::product(CoordinateKernel::gaussian(sigma), CoordinateKernel::constant(),
                                           ClassKernel::one_hot_gaussian(1.0));
                break;
            case 3:
                spec = direct_sum(KernelSpec::gaussian(sigma), 0.5, decision_kernel(), 2.0);
                break;
            default:
                spec = KernelSpec::inf_poly(0.3, 0.9);
                break;
        }
        const std::size_t d = dims(rng);
        std::vector<std::vector<double>> xs(20, std::vector<double>(d));
        std::vector<std::size_t> ys(20);
        for (std::size_t i = 0; i < 20; ++i) {
            for (double& v : xs[i]) v = unit(rng);
            ys[i] = unit(rng) > 0.0 ? 1 : 0;
        }
        ForecastConfig fc;
        ForecastState state(spec, 2, fc);
        std::vector<Simplex> engine;
        for (std::size_t i = 0; i < 20; ++i) {
            engine.push_back(defensive_forecast(state, xs[i], nullptr));
            state.observe(xs[i], engine.back(), ys[i]);
        }
        const auto ref = reference::play_forecast(spec, xs, ys, fc.binary_tol);
        if (ref != engine) ++mismatched;
    }

    std::size_t decide_mismatch = 0;
    const std::vector<LossSpec> losses{LossSpec::absolute(), LossSpec::quadratic()};
    for (int game = 0; game < 20; ++game) {
        const LossSpec& loss = losses[static_cast<std::size_t>(game) % 2];
        std::vector<std::vector<double>> xs(20, std::vector<double>(1));
        std::vector<std::size_t> ys(20);
        for (std::size_t i = 0; i < 20; ++i) {
            xs[i][0] = unit(rng);
            ys[i] = unit(rng) > -0.3 ? 1 : 0;
        }
        MasterPredictor master(decision_kernel(), DecisionConfig{loss, 1e-4});
        std::vector<reference::DecideRound> engine;
        for (std::size_t i = 0; i < 20; ++i) {
            const MasterStep step = master.predict(xs[i]);
            engine.push_back({step.p, step.gamma});
            master.observe(xs[i], step, ys[i]);
        }
        const auto ref = reference::play_decide(decision_kernel(), loss, 1e-4, xs, ys, ForecastConfig{}.binary_tol);
        for (std::size_t i = 0; i < 20; ++i) {
            if (!(ref[i].p == engine[i].p) || ref[i].gamma != engine[i].gamma) {
                ++decide_mismatch;
                break;
            }
        }
    }
    r.passed = mismatched == 0 && decide_mismatch == 0;
    r.detail = "100 random 20-round forecasting games: " + std::to_string(mismatched) +
               " differ from the from-scratch reference; 20 decision games: " + std::to_string(decide_mismatch) +
               " differ";
    return r;
}

using Suite = std::function<Result(Context&)>;

const std::vector<std::pair<std::string, Suite>>& suites() {
    static const std::vector<std::pair<std::string, Suite>> all{
        {"neutrality", neutrality}, {"theorem4", theorem4},       {"capital", capital},
        {"regret", regret_suite},   {"hoeffding", hoeffding},     {"choice", choice_suite},
        {"calibration", calibration}, {"mixture", mixture},       {"oracle", oracle},
    };
    return all;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, s] : suites()) v.push_back(name);
        v.push_back("all");
        return v;
    }();
    return names;
}

std::vector<Result> run(const std::string& suite, const Options& options) {
    Context ctx(options);
    std::vector<Result> out;
    bool found = false;
    int id = 0;
    for (const auto& [name, fn] : suites()) {
        ++id;
        if (suite != "all" && suite != name) continue;
        found = true;
        const auto t0 = Clock::now();
        Result res;
        try {
            res = fn(ctx);
        } catch (const std::exception& e) {
            res.id = id;
            res.name = name;
            res.passed = false;
            res.detail = std::string("error: ") + e.what();
        }
        res.seconds = seconds_since(t0);
        out.push_back(std::move(res));
    }
    if (!found) throw InputError("unknown suite: " + suite);
    return out;
}

std::string format(const Result& r) {
    char head[96];
    std::snprintf(head, sizeof head, "%s  %d %-12s (%.1f s)  ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds);
    return head + r.detail;
}

}  // namespace defcast::acceptance
