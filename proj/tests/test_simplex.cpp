#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "defcast/errors.hpp"
#include "defcast/simplex.hpp"

using defcast::Simplex;

TEST_CASE("simplex construction validates weights") {
    CHECK_NOTHROW(Simplex({0.25, 0.75}));
    CHECK_THROWS_AS(Simplex({1.0}), defcast::InputError);
    CHECK_THROWS_AS(Simplex({-0.1, 1.1}), defcast::InputError);
    CHECK_THROWS_AS(Simplex({0.5, 0.6}), defcast::InputError);
    CHECK_THROWS_AS(Simplex({NAN, 1.0}), defcast::InputError);
    CHECK_THROWS_AS(Simplex::binary(1.5), defcast::InputError);
    CHECK_THROWS_AS(Simplex::uniform(1), defcast::InputError);
}

TEST_CASE("uniform and binary forecasts") {
    const auto u = Simplex::uniform(4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == 0.25);
    const auto b = Simplex::binary(0.3);
    CHECK(b[1] == 0.3);
    CHECK(b[0] == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("projection lands on the simplex and fixes its points") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(5);
        for (double& e : v) e = g(rng);
        const auto p = Simplex::projected(v);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(p[i] >= 0.0);
            s += p[i];
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);

        // Projecting a projection changes nothing.
        const auto q = Simplex::projected(p.weights());
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
    }
    const auto e = Simplex::projected(std::vector<double>{3.0, 0.0, 0.0});
    CHECK(e[0] == 1.0);
    CHECK(e[1] == 0.0);
}

TEST_CASE("projection is the Euclidean nearest point") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    std::exponential_distribution<double> ex(1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(3);
        for (double& e : v) e = g(rng);
        const auto p = Simplex::projected(v);
        double best = 0.0;
        for (std::size_t i = 0; i < 3; ++i) best += (p[i] - v[i]) * (p[i] - v[i]);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> q(3);
            double s = 0.0;
            for (double& e : q) s += (e = ex(rng));
            double d = 0.0;
            for (std::size_t i = 0; i < 3; ++i) d += (q[i] / s - v[i]) * (q[i] / s - v[i]);
            CHECK(d >= best - 1e-12);
        }
    }
}
