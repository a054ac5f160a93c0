#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "defcast/forecaster.hpp"

namespace defcast {

/// Binary strong-law Skeptic: the mean of 16 multiplicative accounts
/// K^e_n = K^e_{n-1} (1 + e (y_n - p_n)) for e in {+-2^-1, ..., +-2^-8}.
class SllnSkeptic {
public:
    static constexpr std::size_t kAccounts = 16;

    SllnSkeptic();

    double capital() const noexcept;
    const std::array<double, kAccounts>& accounts() const noexcept { return accounts_; }
    double epsilon(std::size_t account) const noexcept { return eps_[account]; }

    /// f(y) for y in {0, 1}: the capital change if y is observed.
    std::array<double, 2> bet(const Simplex& p) const;
    /// Returns the capital increment.
    double step(const Simplex& p, std::size_t y);

private:
    std::array<double, kAccounts> eps_{};
    std::array<double, kAccounts> accounts_{};
};

/// The quadratic Skeptic S_N = |sum Psi_n|^2 - sum |Psi_n|^2, started at 0.
/// Its increment at round N is the neutrality gain at the realized triple.
/// This is a signed statistic, not a bankruptcy-free account.
class QuadraticSkeptic {
public:
    QuadraticSkeptic(KernelSpec kernel, std::size_t classes);

    double capital() const noexcept { return state_.capital(); }
    std::size_t rounds() const noexcept { return state_.size(); }
    const ForecastState& state() const noexcept { return state_; }

    std::vector<double> bet(std::span<const double> x, const Simplex& p) const;
    double step(std::span<const double> x, const Simplex& p, std::size_t y);

private:
    ForecastState state_;
};

/// Non-negative mixture S* = sum_k k^-2 2^-k S^k of quadratic capitals,
/// S^k_N = 2^k + S_N while c^2 N <= 2^k and frozen afterwards. Levels above
/// k_max contribute their initial value through the exact tail of sum k^-2.
class MixtureSkeptic {
public:
    explicit MixtureSkeptic(double c, std::size_t k_max = 64);

    /// Capital before any round: pi^2 / 6.
    static double initial_capital();

    double capital() const noexcept;
    double quadratic_capital() const noexcept { return s_; }
    std::size_t rounds() const noexcept { return n_; }
    double c() const noexcept { return c_; }
    std::size_t k_max() const noexcept { return levels_.size(); }
    double level(std::size_t k) const { return levels_.at(k - 1); }
    bool frozen(std::size_t k) const { return frozen_.at(k - 1); }

    /// Bet factor applied to the quadratic gain: sum over active levels.
    double active_weight() const noexcept;
    /// Advances by one round whose quadratic gain is `increment`.
    double step(double increment);

private:
    double c_;
    double s_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> levels_;
    std::vector<bool> frozen_;
    double tail_;
};

}  // namespace defcast
