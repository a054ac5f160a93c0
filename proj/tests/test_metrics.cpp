#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "defcast/errors.hpp"
#include "defcast/forecaster.hpp"
#include "defcast/metrics.hpp"

using defcast::ClassKernel;
using defcast::CoordinateKernel;
using defcast::ForecastPoint;
using defcast::KernelSpec;
using defcast::LossSpec;
using defcast::RoundRecord;
using defcast::Simplex;
using defcast::Transcript;

namespace {

Transcript binary_transcript(const std::vector<double>& p1, const std::vector<std::size_t>& ys) {
    Transcript t;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        RoundRecord r;
        r.n = i + 1;
        r.x = {static_cast<double>(i + 1)};
        r.p = {1.0 - p1[i], p1[i]};
        r.y = ys[i];
        t.rounds.push_back(r);
    }
    return t;
}

Transcript defensive_transcript(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    defcast::ForecastState st(KernelSpec::gaussian(), 2);
    Transcript t;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::vector<double> x{u(rng)};
        const auto p = defcast::defensive_forecast(st, x);
        const std::size_t y = u(rng) < 0.2 + 0.6 * x[0] ? 1 : 0;
        st.observe(x, p, y);
        RoundRecord r;
        r.n = i;
        r.x = x;
        r.p = p.vec();
        r.y = y;
        t.rounds.push_back(r);
    }
    return t;
}

}  // namespace

TEST_CASE("calibration bins") {
    SUBCASE("constant one half on alternating outcomes") {
        std::vector<std::size_t> ys;
        for (int n = 1; n <= 1000; ++n) ys.push_back(n % 2);
        const auto bins = defcast::calibration_bins(binary_transcript(std::vector<double>(1000, 0.5), ys), 0.1, 1);
        REQUIRE(bins.size() == 1);
        CHECK(bins[0].count == 1000);
        CHECK(bins[0].deviation == 0.0);
    }
    SUBCASE("point masses matching the outcomes") {
        const auto bins = defcast::calibration_bins(binary_transcript({1.0, 0.0, 1.0}, {1, 0, 1}), 0.1, 1);
        CHECK(bins.size() == 2);
        for (const auto& b : bins) CHECK(b.deviation == 0.0);
    }
    SUBCASE("one half against all ones") {
        const auto bins = defcast::calibration_bins(binary_transcript({0.5, 0.5, 0.5, 0.5}, {1, 1, 1, 1}), 0.25, 1);
        REQUIRE(bins.size() == 1);
        CHECK(bins[0].deviation == 0.5);
    }
    SUBCASE("empty transcript") { CHECK(defcast::calibration_bins(Transcript{}, 0.1, 1).empty()); }
    SUBCASE("counts partition the rounds") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> ps;
        std::vector<std::size_t> ys;
        for (int i = 0; i < 777; ++i) {
            ps.push_back(i % 50 == 0 ? 1.0 : u(rng));
            ys.push_back(rng() % 2);
        }
        std::size_t total = 0;
        for (const auto& b : defcast::calibration_bins(binary_transcript(ps, ys), 0.07, 1)) total += b.count;
        CHECK(total == 777);
    }
}

TEST_CASE("degenerate test functions are rejected") {
    CHECK_THROWS_AS(defcast::TestFunction(KernelSpec::gaussian(), {}, {}), defcast::DegenerateFunctionError);
    const defcast::TestFunction zero(KernelSpec::gaussian(), {ForecastPoint({0.0}, Simplex::binary(0.5), 1)}, {0.0});
    CHECK_THROWS_AS(defcast::kernel_discrepancy(binary_transcript({0.5}, {1}), zero), defcast::DegenerateFunctionError);
}

TEST_CASE("discrepancy of a single representer, by hand") {
    const auto k = KernelSpec::product(CoordinateKernel::constant(), CoordinateKernel::constant(), ClassKernel::indicator(1));
    // f(x, p, y) = [y = 1], so the statistic is |sum (y_n - p_n)|.
    const defcast::TestFunction f(k, {ForecastPoint({0.0}, Simplex::binary(0.5), 1)}, {1.0});
    CHECK(f.norm() == 1.0);
    const auto d = defcast::kernel_discrepancy(binary_transcript({0.2, 0.9, 0.4}, {1, 1, 0}), f);
    CHECK(d.statistic == doctest::Approx(0.5));
    CHECK(d.bound == doctest::Approx(2.0 * std::sqrt(3.0)));
}

TEST_CASE("an ignored coordinate does not change the statistic") {
    const auto k =
        KernelSpec::product(CoordinateKernel::gaussian(0.5), CoordinateKernel::constant(), ClassKernel::kronecker());
    const auto t = defensive_transcript(200, 3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ForecastPoint> a1;
    std::vector<ForecastPoint> a2;
    std::vector<double> c;
    for (int j = 0; j < 6; ++j) {
        const double x = u(rng);
        const std::size_t y = j % 2;
        a1.emplace_back(std::vector<double>{x}, Simplex::binary(u(rng)), y);
        a2.emplace_back(std::vector<double>{x}, Simplex::binary(u(rng)), y);
        c.push_back(u(rng) - 0.5);
    }
    const auto d1 = defcast::kernel_discrepancy(t, defcast::TestFunction(k, a1, c));
    const auto d2 = defcast::kernel_discrepancy(t, defcast::TestFunction(k, a2, c));
    CHECK(d1.statistic == doctest::Approx(d2.statistic).epsilon(1e-14));
    CHECK(d1.norm == doctest::Approx(d2.norm).epsilon(1e-14));
}

TEST_CASE("defensive transcripts stay inside the kernel bound") {
    const auto t = defensive_transcript(400, 5);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ForecastPoint> anchors;
        std::vector<double> coeffs;
        for (int j = 0; j < 5; ++j) {
            anchors.emplace_back(std::vector<double>{u(rng)}, Simplex::binary(u(rng)), rng() % 2);
            coeffs.push_back(g(rng));
        }
        const auto d = defcast::kernel_discrepancy(t, defcast::TestFunction(KernelSpec::gaussian(), anchors, coeffs));
        CHECK(d.statistic <= d.bound + 400 * 1e-6);
    }
}

TEST_CASE("regret examples") {
    const auto loss = LossSpec::absolute();
    std::vector<std::size_t> ys;
    for (int i = 0; i < 10; ++i) ys.push_back((i * 7) % 3 == 0 ? 1 : 0);
    auto t = binary_transcript(std::vector<double>(10, 0.5), ys);
    std::vector<std::pair<std::vector<double>, std::vector<double>>> own;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> oracle;
    for (auto& r : t.rounds) {
        r.gamma = std::vector<double>{0.5};
        own.push_back({r.x, *r.gamma});
        oracle.push_back({r.x, {static_cast<double>(r.y)}});
    }
    const auto same = defcast::regret(t, defcast::PredictionRule::table(own), loss, 1.0, 0.0);
    CHECK(same.regret == 0.0);
    const auto vs_oracle = defcast::regret(t, defcast::PredictionRule::table(oracle), loss, 1.0, 0.0);
    CHECK(vs_oracle.regret == doctest::Approx(0.5 * 10));
    CHECK(vs_oracle.rule_loss == 0.0);
    CHECK(vs_oracle.bound == doctest::Approx(std::sqrt(5.0) * std::sqrt(10.0) + 1.0));

    const auto partial = defcast::PredictionRule::table({{{1.0}, {0.5}}});
    CHECK_THROWS_AS(defcast::regret(t, partial, loss, 1.0, 0.0), defcast::InputError);
}

TEST_CASE("regret is additive over concatenated transcripts") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto loss = LossSpec::quadratic();
    const auto rule = defcast::PredictionRule::logistic({{1.3}}, {-0.4});
    auto make = [&](std::size_t n) {
        Transcript t;
        for (std::size_t i = 1; i <= n; ++i) {
            RoundRecord r;
            r.n = i;
            r.x = {u(rng)};
            r.p = {0.5, 0.5};
            r.gamma = std::vector<double>{u(rng)};
            r.y = rng() % 2;
            t.rounds.push_back(r);
        }
        return t;
    };
    const auto a = make(37);
    const auto b = make(55);
    Transcript ab = a;
    for (auto r : b.rounds) {
        r.n += a.size();
        ab.rounds.push_back(r);
    }
    const double whole = defcast::regret(ab, rule, loss, 1.0, 0.0).regret;
    const double parts = defcast::regret(a, rule, loss, 1.0, 0.0).regret + defcast::regret(b, rule, loss, 1.0, 0.0).regret;
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("Hoeffding band") {
    CHECK(defcast::hoeffding_width(1.0, 0.01, 1000) == doctest::Approx(std::sqrt(2.0 * std::log(100.0)) * std::sqrt(1000.0)).epsilon(1e-14));
    CHECK_THROWS_AS(defcast::hoeffding_width(1.0, 1.0, 10), defcast::InputError);

    // Point-mass predictions sample themselves.
    auto t = binary_transcript({0.5, 0.5, 0.5}, {1, 0, 1});
    for (auto& r : t.rounds) {
        r.gamma = std::vector<double>{1.0};
        r.g_sample = std::vector<double>{1.0};
        r.d_sample = std::vector<double>{0.0};
    }
    const auto rep = defcast::hoeffding_band(t, defcast::PredictionRule::constant({0.0}), LossSpec::absolute(), 0.01);
    CHECK(rep.deviation == 0.0);
    t.rounds[1].g_sample.reset();
    CHECK_THROWS_AS(defcast::hoeffding_band(t, defcast::PredictionRule::constant({0.0}), LossSpec::absolute(), 0.01),
                    defcast::InputError);
}

TEST_CASE("randomized loss") {
    CHECK(defcast::randomized_loss(LossSpec::absolute(), 0.3, 1) == doctest::Approx(0.7));
    CHECK(defcast::randomized_loss(LossSpec::quadratic(), 0.3, 0) == doctest::Approx(0.3));
}

TEST_CASE("representer fit interpolates with a small ridge") {
    std::vector<ForecastPoint> anchors;
    std::vector<double> targets;
    for (int j = 0; j < 8; ++j) {
        anchors.emplace_back(std::vector<double>{j / 7.0}, Simplex::binary(0.5), j % 2);
        targets.push_back(std::sin(j));
    }
    const auto f = defcast::fit_representer(KernelSpec::gaussian(), anchors, targets, 1e-10);
    for (std::size_t j = 0; j < anchors.size(); ++j) CHECK(f(anchors[j].view()) == doctest::Approx(targets[j]).epsilon(1e-5));
}

TEST_CASE("metrics CSV") {
    std::ostringstream out;
    defcast::write_metrics_csv(out, {{"calibration", "class=1", 10, 1.0 / 3.0, 0.1, 10.0 / 3.0}});
    CHECK(out.str() == "metric,params,N,statistic,bound,ratio\ncalibration,class=1,10,0.333333333333,0.1,3.33333333333\n");
}
