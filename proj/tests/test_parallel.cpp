#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "defcast/kernel_rows.hpp"
#include "defcast/parallel.hpp"

using defcast::ClassKernel;
using defcast::CoordinateKernel;
using defcast::KernelRows;
using defcast::KernelSpec;

namespace {

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t m) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(m);
    double s = 0.0;
    for (double& v : p) s += (v = e(rng));
    for (double& v : p) v /= s;
    return p;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("parallel and serial sums agree bit for bit") {
    const std::vector<KernelSpec> kernels{
        KernelSpec::gaussian(1.0),
        KernelSpec::product(CoordinateKernel::gaussian(0.5), CoordinateKernel::gaussian(1.0), ClassKernel::kronecker()),
        KernelSpec::weighted_sum({{1.0, KernelSpec::inf_poly(0.2, 0.9)}, {2.0, KernelSpec::gaussian(0.4)}}),
    };
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& k : kernels) {
        for (std::size_t m : {2u, 4u}) {
            for (std::size_t n : {std::size_t{100}, defcast::kParallelThreshold + 1, std::size_t{3000}}) {
                KernelRows rows(k, m);
                for (std::size_t i = 0; i < n; ++i) {
                    const std::vector<double> x{u(rng), u(rng)};
                    const auto p = random_weights(rng, m);
                    rows.append({x, p, static_cast<std::size_t>(rng() % m)});
                }
                const std::vector<double> x{u(rng), u(rng)};
                const auto cache = rows.prepare(x);
                const auto p = random_weights(rng, m);
                std::vector<double> par(m, 0.0);
                std::vector<double> ser(m, 0.0);
                std::vector<double> scratch;
                rows.accumulate(cache, p, par, scratch);
                rows.accumulate_serial(cache, p, ser, scratch);
                CHECK(same_bits(par, ser));
            }
        }
    }
}

TEST_CASE("parallel_for visits every index once") {
    std::vector<int> hits(5000, 0);
    defcast::parallel_for(0, hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
}
