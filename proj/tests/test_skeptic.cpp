#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "defcast/forecaster.hpp"
#include "defcast/skeptic.hpp"

using defcast::ClassKernel;
using defcast::CoordinateKernel;
using defcast::KernelSpec;
using defcast::MixtureSkeptic;
using defcast::Simplex;
using defcast::SllnSkeptic;

namespace {

KernelSpec k29_constant() {
    return KernelSpec::product(CoordinateKernel::constant(), CoordinateKernel::constant(), ClassKernel::indicator(1));
}

}  // namespace

TEST_CASE("strong-law Skeptic: exact forecasts leave the capital at 1") {
    SllnSkeptic s;
    for (int n = 0; n < 50; ++n) s.step(Simplex::binary(n % 2), n % 2);
    CHECK(s.capital() == 1.0);
}

TEST_CASE("strong-law Skeptic: the half account compounds at 1.25") {
    SllnSkeptic s;
    for (int n = 0; n < 100; ++n) s.step(Simplex::binary(0.5), 1);
    std::size_t half = SllnSkeptic::kAccounts;
    for (std::size_t a = 0; a < SllnSkeptic::kAccounts; ++a) {
        if (s.epsilon(a) == 0.5) half = a;
    }
    REQUIRE(half < SllnSkeptic::kAccounts);
    CHECK(s.accounts()[half] == doctest::Approx(std::pow(1.25, 100)).epsilon(1e-12));
    CHECK(s.capital() >= std::pow(1.25, 100) / 16.0 * (1 - 1e-12));
}

TEST_CASE("strong-law Skeptic does not grow on fair coins") {
    int below = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution coin(0.5);
        SllnSkeptic s;
        for (int n = 0; n < 1000; ++n) s.step(Simplex::binary(0.5), coin(rng) ? 1 : 0);
        if (s.capital() < 100.0) ++below;
    }
    CHECK(below >= 95);
}

TEST_CASE("strong-law Skeptic forces a persistent bias") {
    SUBCASE("frequency 0.6 against forecast 0.5") {
        SllnSkeptic s;
        for (int n = 0; n < 1000; ++n) s.step(Simplex::binary(0.5), n % 5 < 3 ? 1 : 0);
        CHECK(s.capital() > 1e6);
    }
    SUBCASE("frequency 0.2 against forecast 0.3") {
        SllnSkeptic s;
        for (int n = 0; n < 1000; ++n) s.step(Simplex::binary(0.3), n % 5 == 0 ? 1 : 0);
        CHECK(s.capital() > 1e6);
    }
}

TEST_CASE("bets have non-positive expectation and the capital stays non-negative") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SllnSkeptic s;
    defcast::QuadraticSkeptic q(KernelSpec::gaussian(), 2);
    for (int n = 0; n < 500; ++n) {
        const auto p = Simplex::binary(u(rng));
        const auto f = s.bet(p);
        CHECK(p[0] * f[0] + p[1] * f[1] <= 1e-10);
        const std::vector<double> x{u(rng)};
        const auto g = q.bet(x, p);
        CHECK(p[0] * g[0] + p[1] * g[1] <= 1e-10);
        const std::size_t y = u(rng) < 0.5 ? 1 : 0;
        s.step(p, y);
        q.step(x, p, y);
        CHECK(s.capital() >= 0.0);
    }
}

TEST_CASE("quadratic Skeptic") {
    SUBCASE("one round gives zero") {
        defcast::QuadraticSkeptic q(KernelSpec::gaussian(), 2);
        q.step(std::vector<double>{0.1}, Simplex::binary(0.9), 0);
        CHECK(q.capital() == 0.0);
    }
    SUBCASE("constant 0.9 on fair coins matches the direct sums") {
        std::mt19937_64 rng(31);
        std::bernoulli_distribution coin(0.5);
        defcast::QuadraticSkeptic q(k29_constant(), 2);
        double sum = 0.0;
        double sq = 0.0;
        const std::vector<double> x{0.0};
        for (int n = 1; n <= 2000; ++n) {
            const std::size_t y = coin(rng) ? 1 : 0;
            q.step(x, Simplex::binary(0.9), y);
            const double e = static_cast<double>(y) - 0.9;
            sum += e;
            sq += e * e;
            const double want = sum * sum - sq;
            CHECK(q.capital() == doctest::Approx(want).epsilon(1e-9).scale(1.0));
        }
        CHECK(q.capital() / (2000.0 * 2000.0) >= 0.1);
        CHECK(q.capital() / (2000.0 * 2000.0) <= 0.25);
    }
}

TEST_CASE("mixture Skeptic starts at pi^2/6") {
    MixtureSkeptic m(2.0);
    CHECK(std::abs(m.capital() - std::numbers::pi * std::numbers::pi / 6.0) <= 1e-12);
    CHECK(MixtureSkeptic::initial_capital() == std::numbers::pi * std::numbers::pi / 6.0);
}

TEST_CASE("mixture levels follow the freeze rule") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 3.0);
    const double c = 1.5;
    MixtureSkeptic m(c, 20);
    std::vector<double> s{0.0};  // S_0, S_1, ...
    for (int n = 1; n <= 600; ++n) {
        const double inc = g(rng);
        m.step(inc);
        s.push_back(s.back() + inc);
    }
    const std::size_t n = 600;
    for (std::size_t k = 1; k <= 20; ++k) {
        const double base = std::ldexp(1.0, static_cast<int>(k));
        std::size_t last = 0;
        for (std::size_t t = 1; t <= n; ++t) {
            if (c * c * static_cast<double>(t) <= base) last = t;
        }
        CHECK(m.level(k) == doctest::Approx(base + s[last]).epsilon(1e-12));
        CHECK(m.frozen(k) == (c * c * static_cast<double>(n) > base));
    }
}

TEST_CASE("mixture capital stays near its start under defensive forecasts") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    defcast::ForecastState st(KernelSpec::gaussian(), 2);
    MixtureSkeptic m(2.0);
    for (int n = 1; n <= 300; ++n) {
        const std::vector<double> x{u(rng)};
        const auto p = defcast::defensive_forecast(st, x);
        const auto r = st.observe(x, p, u(rng) < 0.7 ? 1 : 0);
        m.step(r.gain);
        CHECK(m.capital() >= 0.0);
        CHECK(m.capital() <= MixtureSkeptic::initial_capital() + n * 1e-6);
    }
}
