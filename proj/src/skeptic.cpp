#include "defcast/skeptic.hpp"

#include <cmath>
#include <numbers>

#include "defcast/errors.hpp"

namespace defcast {

SllnSkeptic::SllnSkeptic() {
    for (std::size_t j = 0; j < kAccounts / 2; ++j) {
        const double e = std::ldexp(1.0, -static_cast<int>(j + 1));
        eps_[2 * j] = e;
        eps_[2 * j + 1] = -e;
    }
    accounts_.fill(1.0);
}

double SllnSkeptic::capital() const noexcept {
    double s = 0.0;
    for (double a : accounts_) s += a;
    return s / static_cast<double>(kAccounts);
}

std::array<double, 2> SllnSkeptic::bet(const Simplex& p) const {
    if (p.size() != 2) throw InputError("the strong-law Skeptic plays binary games");
    double stake = 0.0;
    for (std::size_t j = 0; j < kAccounts; ++j) stake += accounts_[j] * eps_[j];
    stake /= static_cast<double>(kAccounts);
    return {stake * (0.0 - p[1]), stake * (1.0 - p[1])};
}

double SllnSkeptic::step(const Simplex& p, std::size_t y) {
    if (p.size() != 2) throw InputError("the strong-law Skeptic plays binary games");
    if (y > 1) throw InputError("observation index out of range");
    const double before = capital();
    const double d = static_cast<double>(y) - p[1];
    for (std::size_t j = 0; j < kAccounts; ++j) accounts_[j] *= 1.0 + eps_[j] * d;
    return capital() - before;
}

QuadraticSkeptic::QuadraticSkeptic(KernelSpec kernel, std::size_t classes) : state_(std::move(kernel), classes) {}

std::vector<double> QuadraticSkeptic::bet(std::span<const double> x, const Simplex& p) const {
    return neutrality_gains(state_, x, p);
}

double QuadraticSkeptic::step(std::span<const double> x, const Simplex& p, std::size_t y) {
    return state_.observe(x, p, y).gain;
}

MixtureSkeptic::MixtureSkeptic(double c, std::size_t k_max) : c_(c), levels_(k_max), frozen_(k_max, false) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("mixture constant must be positive");
    if (k_max < 1 || k_max > 1000) throw InputError("mixture level cap out of range");
    double head = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        levels_[k - 1] = std::ldexp(1.0, static_cast<int>(k));
        head += 1.0 / static_cast<double>(k * k);
    }
    tail_ = std::numbers::pi * std::numbers::pi / 6.0 - head;
}

double MixtureSkeptic::initial_capital() { return std::numbers::pi * std::numbers::pi / 6.0; }

double MixtureSkeptic::capital() const noexcept {
    double s = 0.0;
    for (std::size_t k = 1; k <= levels_.size(); ++k) {
        const double kk = static_cast<double>(k);
        s += std::ldexp(levels_[k - 1], -static_cast<int>(k)) / (kk * kk);
    }
    return s + tail_;
}

double MixtureSkeptic::active_weight() const noexcept {
    double w = 0.0;
    const double next = c_ * c_ * static_cast<double>(n_ + 1);
    for (std::size_t k = 1; k <= levels_.size(); ++k) {
        if (frozen_[k - 1] || next > std::ldexp(1.0, static_cast<int>(k))) continue;
        const double kk = static_cast<double>(k);
        w += std::ldexp(1.0, -static_cast<int>(k)) / (kk * kk);
    }
    return w;
}

double MixtureSkeptic::step(double increment) {
    const double before = capital();
    ++n_;
    s_ += increment;
    const double reach = c_ * c_ * static_cast<double>(n_);
    for (std::size_t k = 1; k <= levels_.size(); ++k) {
        if (frozen_[k - 1]) continue;
        const double base = std::ldexp(1.0, static_cast<int>(k));
        if (reach <= base) {
            levels_[k - 1] = base + s_;
        } else {
            frozen_[k - 1] = true;
        }
    }
    return capital() - before;
}

}  // namespace defcast
