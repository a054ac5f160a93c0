#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "defcast/errors.hpp"
#include "defcast/forecaster.hpp"
#include "reference.hpp"

using defcast::ClassKernel;
using defcast::CoordinateKernel;
using defcast::ForecastState;
using defcast::KernelSpec;
using defcast::Simplex;

namespace {

// k((x,p,y),(x',p',y')) = [y = 1][y' = 1], so S(p) = sum_i (y_i - p_i).
KernelSpec k29_constant() {
    return KernelSpec::product(CoordinateKernel::constant(), CoordinateKernel::constant(), ClassKernel::indicator(1));
}

Simplex random_forecast(std::mt19937_64& rng, std::size_t m) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(m);
    double s = 0.0;
    for (double& v : p) s += (v = e(rng));
    for (double& v : p) v /= s;
    return Simplex::projected(p);
}

}  // namespace

TEST_CASE("empty history") {
    ForecastState st(KernelSpec::gaussian(), 3);
    const std::vector<double> x{0.4};
    const auto p = Simplex::binary(0.2);
    ForecastState bin(KernelSpec::gaussian(), 2);
    for (std::size_t y = 0; y < 2; ++y) CHECK(defcast::neutrality_gain(bin, x, p, y) == 0.0);
    CHECK(defcast::defensive_forecast(st, x) == Simplex::uniform(3));
    CHECK(defcast::k29_binary_root(bin, x) == 0.5);
}

TEST_CASE("the gain has zero mean under the forecast") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t m : {2u, 3u, 5u}) {
        ForecastState st(KernelSpec::gaussian(0.8), m);
        for (int n = 0; n < 30; ++n) {
            const std::vector<double> x{u(rng), u(rng)};
            st.observe(x, random_forecast(rng, m), rng() % m);
        }
        for (int trial = 0; trial < 50; ++trial) {
            const std::vector<double> x{u(rng), u(rng)};
            const auto p = random_forecast(rng, m);
            const auto g = defcast::neutrality_gains(st, x, p);
            double mean = 0.0;
            for (std::size_t y = 0; y < m; ++y) mean += p[y] * g[y];
            CHECK(std::abs(mean) <= 1e-10);
        }
    }
}

TEST_CASE("constant binary kernel, hand-expanded") {
    const std::vector<double> x{0.0};
    SUBCASE("one upward error gives 2 (1/2) (1 - p) at y = 1") {
        ForecastState st(k29_constant(), 2);
        st.observe(x, Simplex::binary(0.5), 1);
        for (double p : {0.0, 0.25, 0.5, 0.8, 1.0}) {
            CHECK(defcast::neutrality_gain(st, x, Simplex::binary(p), 1) ==
                  doctest::Approx(2.0 * 0.5 * (1.0 - p)).epsilon(1e-14));
        }
        defcast::Certificate cert;
        CHECK(defcast::k29_binary_root(st, x, nullptr, &cert) == 1.0);
        CHECK(cert.boundary);
        CHECK(cert.binary_s == doctest::Approx(0.5));
        CHECK(defcast::defensive_forecast(st, x)[1] == 1.0);
    }
    SUBCASE("one downward error forces 0") {
        ForecastState st(k29_constant(), 2);
        st.observe(x, Simplex::binary(0.9), 0);
        CHECK(defcast::k29_binary_root(st, x) == 0.0);
    }
    SUBCASE("cancelling errors give the midpoint") {
        ForecastState st(k29_constant(), 2);
        st.observe(x, Simplex::binary(0.5), 1);
        st.observe(x, Simplex::binary(0.5), 0);
        CHECK(defcast::k29_binary_root(st, x) == 0.5);
    }
}

TEST_CASE("binary root rule") {
    CHECK(defcast::binary_root([](double) { return 0.0; }, 1e-9) == 0.5);
    CHECK(defcast::binary_root([](double) { return 2.0; }, 1e-9) == 1.0);
    CHECK(defcast::binary_root([](double) { return -2.0; }, 1e-9) == 0.0);
    const double r = defcast::binary_root([](double p) { return 0.3 - p; }, 1e-9);
    CHECK(std::abs(0.3 - r) <= 1e-9);
    // Two roots: the one nearer 1/2 wins.
    const double two = defcast::binary_root([](double p) { return (p - 0.1) * (p - 0.7); }, 1e-12);
    CHECK(two == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("cached gains match the from-scratch four-term sum") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<KernelSpec> kernels{
        KernelSpec::gaussian(1.0),
        KernelSpec::product(CoordinateKernel::gaussian(0.5), CoordinateKernel::gaussian(1.0), ClassKernel::kronecker()),
        KernelSpec::weighted_sum({{1.0, KernelSpec::inf_poly(0.3, 0.95)}, {0.5, KernelSpec::constant(2.0)}}),
    };
    for (int game = 0; game < 100; ++game) {
        const auto& k = kernels[game % kernels.size()];
        const std::size_t m = 2 + game % 2;
        ForecastState st(k, m);
        for (int n = 0; n < 20; ++n) {
            const std::vector<double> x{u(rng), u(rng)};
            st.observe(x, random_forecast(rng, m), rng() % m);
        }
        const std::vector<double> x{u(rng), u(rng)};
        const auto p = random_forecast(rng, m);
        const auto g = defcast::neutrality_gains(st, x, p);
        for (std::size_t y = 0; y < m; ++y) {
            const double r = defcast::reference::gain(k, st.history(), x, p, y);
            CHECK(std::abs(g[y] - r) <= 1e-9 * std::max(1.0, std::abs(r)));
        }
        const double cap = defcast::reference::capital(k, st.history());
        CHECK(std::abs(st.capital() - cap) <= 1e-9 * std::max(1.0, std::abs(cap)));
    }
}

TEST_CASE("three-class forecasts neutralize the gain") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ForecastState st(KernelSpec::gaussian(1.0), 3);
    for (int n = 1; n <= 150; ++n) {
        const std::vector<double> x{u(rng)};
        defcast::Certificate cert;
        const auto p = defcast::defensive_forecast(st, x, nullptr, &cert);
        const auto g = defcast::neutrality_gains(st, x, p);
        CHECK(*std::max_element(g.begin(), g.end()) <= 1e-6);
        const double v = u(rng);
        st.observe(x, p, v < 0.2 ? 0 : (v < 0.5 ? 1 : 2));
        CHECK(st.capital() <= n * 1e-6);
    }
}

TEST_CASE("binary defensive play keeps the capital below the accumulated tolerance") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ForecastState st(KernelSpec::gaussian(1.0), 2);
    for (int n = 1; n <= 300; ++n) {
        const std::vector<double> x{u(rng)};
        const auto p = defcast::defensive_forecast(st, x);
        st.observe(x, p, u(rng) < 0.3 + 0.4 * x[0] ? 1 : 0);
        CHECK(st.capital() <= n * 1e-6);
    }
}

TEST_CASE("forecasts are deterministic") {
    auto play = [] {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        ForecastState st(KernelSpec::gaussian(0.5), 3);
        std::vector<Simplex> out;
        for (int n = 0; n < 40; ++n) {
            const std::vector<double> x{u(rng), u(rng)};
            out.push_back(defcast::defensive_forecast(st, x));
            st.observe(x, out.back(), rng() % 3);
        }
        return out;
    };
    CHECK(play() == play());
}

TEST_CASE("observe keeps order and reset clears") {
    ForecastState st(KernelSpec::gaussian(), 2);
    st.observe(std::vector<double>{1.0}, Simplex::binary(0.2), 0);
    st.observe(std::vector<double>{2.0}, Simplex::binary(0.7), 1);
    REQUIRE(st.size() == 2);
    CHECK(st.history()[0].x[0] == 1.0);
    CHECK(st.history()[1].y == 1);
    CHECK_THROWS_AS(st.observe(std::vector<double>{1.0}, Simplex::binary(0.5), 2), defcast::InputError);
    st.reset();
    CHECK(st.size() == 0);
    CHECK(st.capital() == 0.0);
}

TEST_CASE("a single round leaves the quadratic capital at zero") {
    ForecastState st(KernelSpec::gaussian(), 2);
    const auto r = st.observe(std::vector<double>{0.3}, Simplex::binary(0.2), 1);
    CHECK(r.gain == 0.0);
    CHECK(st.capital() == 0.0);
}
