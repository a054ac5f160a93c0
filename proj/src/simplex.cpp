#include "defcast/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "defcast/errors.hpp"

namespace defcast {

Simplex::Simplex(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.size() < 2) throw InputError("simplex needs at least two classes");
    double sum = 0.0;
    for (double v : w_) {
        if (!std::isfinite(v)) throw InputError("simplex weight is not finite");
        if (v < 0.0) throw InputError("simplex weight is negative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) throw InputError("simplex weights do not sum to 1");
}

Simplex Simplex::uniform(std::size_t m) {
    if (m < 2) throw InputError("simplex needs at least two classes");
    return Simplex(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

Simplex Simplex::binary(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("binary forecast outside [0,1]");
    return Simplex({1.0 - p, p});
}

Simplex Simplex::projected(std::span<const double> v) {
    std::vector<double> out(v.size());
    project_to_simplex(v, out);
    return Simplex(std::move(out));
}

void project_to_simplex(std::span<const double> v, std::span<double> out) {
    const std::size_t m = v.size();
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        cumulative += u[j];
        const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        out[j] = std::max(v[j] - theta, 0.0);
        sum += out[j];
    }
    // Renormalize away the rounding of the threshold.
    if (sum > 0.0) {
        for (double& o : out) o /= sum;
    } else {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(m));
    }
}

}  // namespace defcast
