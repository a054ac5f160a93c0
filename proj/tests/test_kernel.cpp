#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "defcast/errors.hpp"
#include "defcast/kernel.hpp"

using defcast::ClassKernel;
using defcast::CoordinateKernel;
using defcast::ForecastPoint;
using defcast::KernelSpec;
using defcast::Simplex;

namespace {

ForecastPoint random_point(std::mt19937_64& rng, std::size_t d, std::size_t m) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> x(d);
    for (double& v : x) v = u(rng);
    std::vector<double> p(m);
    double s = 0.0;
    for (double& v : p) s += (v = e(rng));
    for (double& v : p) v /= s;
    return {x, Simplex::projected(p), static_cast<std::size_t>(rng() % m)};
}

std::vector<KernelSpec> sample_kernels() {
    return {
        KernelSpec::gaussian(1.0),
        KernelSpec::gaussian(0.3),
        KernelSpec::inf_poly(0.3, 0.9),
        KernelSpec::product(CoordinateKernel::gaussian(0.5), CoordinateKernel::gaussian(1.0), ClassKernel::kronecker()),
        KernelSpec::product(CoordinateKernel::constant(), CoordinateKernel::gaussian(2.0),
                            ClassKernel::one_hot_gaussian(1.0)),
        KernelSpec::weighted_sum({{0.5, KernelSpec::gaussian(1.0)}, {2.0, KernelSpec::constant(1.0)}}),
        KernelSpec::scaled(3.0, KernelSpec::gaussian(0.7)),
    };
}

}  // namespace

TEST_CASE("gaussian values") {
    const std::vector<double> x0{0.0};
    const std::vector<double> x1{1.0};
    const std::vector<double> p{0.5, 0.5};
    const auto k = KernelSpec::gaussian(1.0);
    CHECK(eval_kernel(k, {x0, p, 1}, {x0, p, 1}) == 1.0);
    CHECK(eval_kernel(k, {x0, p, 1}, {x1, p, 1}) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
    // Distinct classes sit sqrt(2) apart in the one-hot block.
    CHECK(eval_kernel(k, {x0, p, 0}, {x0, p, 1}) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("kronecker product vanishes across classes") {
    const auto k =
        KernelSpec::product(CoordinateKernel::gaussian(1.0), CoordinateKernel::gaussian(1.0), ClassKernel::kronecker());
    const std::vector<double> x{0.2, -0.4};
    const std::vector<double> p{0.1, 0.9};
    CHECK(eval_kernel(k, {x, p, 0}, {x, p, 1}) == 0.0);
}

TEST_CASE("kernels are exactly symmetric") {
    std::mt19937_64 rng(1);
    for (const auto& k : sample_kernels()) {
        for (int i = 0; i < 1000; ++i) {
            const auto a = random_point(rng, 2, 3);
            const auto b = random_point(rng, 2, 3);
            CHECK(eval_kernel(k, a.view(), b.view()) == eval_kernel(k, b.view(), a.view()));
        }
    }
}

TEST_CASE("Gram matrices are positive semidefinite") {
    std::mt19937_64 rng(2);
    for (const auto& k : sample_kernels()) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<ForecastPoint> pts;
            for (int i = 0; i < 20; ++i) pts.push_back(random_point(rng, 2, 3));
            Eigen::MatrixXd g(20, 20);
            for (int i = 0; i < 20; ++i) {
                for (int j = 0; j < 20; ++j) g(i, j) = eval_kernel(k, pts[i].view(), pts[j].view());
            }
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
            CHECK(es.eigenvalues().minCoeff() >= -1e-8 * g.trace());
        }
    }
}

TEST_CASE("imbedding constants") {
    CHECK(imbedding_constant(KernelSpec::gaussian(2.0)) == 1.0);
    CHECK(imbedding_constant(KernelSpec::weighted_sum({{1.0, KernelSpec::gaussian()}, {1.0, KernelSpec::gaussian()}})) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(imbedding_constant(KernelSpec::scaled(4.0, KernelSpec::gaussian())) == 2.0);
    CHECK(imbedding_constant(KernelSpec::inf_poly(1.0, 0.6)) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK_THROWS_AS(imbedding_constant(KernelSpec::inf_poly(1.0)), defcast::UnboundedConstantError);
}

TEST_CASE("imbedding constant bounds the diagonal") {
    std::mt19937_64 rng(4);
    for (const auto& k : sample_kernels()) {
        const double c = imbedding_constant(k);
        for (int i = 0; i < 500; ++i) {
            const auto a = random_point(rng, 2, 3);
            CHECK(std::sqrt(eval_kernel(k, a.view(), a.view())) <= c + 1e-12);
        }
    }
}

TEST_CASE("direct sums") {
    const auto g = KernelSpec::gaussian();
    const std::vector<double> x{0.3};
    const std::vector<double> p{0.5, 0.5};
    CHECK(eval_kernel(direct_sum(g, 1.0, g, 1.0), {x, p, 0}, {x, p, 0}) == 2.0);
    CHECK(eval_kernel(direct_sum(g, 2.0, g, 3.0), {x, p, 0}, {x, p, 0}) == 5.0);
    CHECK_THROWS_AS(direct_sum(g, 1.0, g, 0.0), defcast::InputError);
    CHECK_THROWS_AS(direct_sum(g, -1.0, g, 1.0), defcast::InputError);

    std::mt19937_64 rng(5);
    const auto k0 = KernelSpec::gaussian(0.5);
    const auto k1 = KernelSpec::inf_poly(0.2, 0.9);
    const auto s = direct_sum(k0, 0.7, k1, 1.3);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_point(rng, 2, 2);
        const auto b = random_point(rng, 2, 2);
        const double want = 0.7 * eval_kernel(k0, a.view(), b.view()) + 1.3 * eval_kernel(k1, a.view(), b.view());
        CHECK(eval_kernel(s, a.view(), b.view()) == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("inf_poly domain") {
    const auto k = KernelSpec::inf_poly(1.0, 0.5);
    const std::vector<double> p{0.5, 0.5};
    const std::vector<double> far{0.9};
    CHECK_THROWS_AS(eval_kernel(k, {far, p, 0}, {far, p, 0}), defcast::DomainError);
    const std::vector<double> bad{NAN};
    CHECK_THROWS_AS(eval_kernel(KernelSpec::gaussian(), {bad, p, 0}, {bad, p, 0}), defcast::InputError);
}

TEST_CASE("kernel JSON round trip") {
    for (const auto& k : sample_kernels()) {
        const auto j = defcast::kernel_to_json(k);
        CHECK(defcast::kernel_from_json(j) == k);
        CHECK(defcast::kernel_to_json(defcast::kernel_from_json(j)) == j);
    }
    CHECK_THROWS_AS(defcast::kernel_from_json({{"type", "nope"}}), defcast::InputError);
}
