#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "defcast/decision.hpp"
#include "defcast/kernel.hpp"
#include "defcast/loss.hpp"
#include "defcast/transcript.hpp"

namespace defcast {

struct CalibrationBin {
    std::size_t index = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_forecast = 0.0;
    double frequency = 0.0;
    double deviation = 0.0;  // |frequency - mean_forecast|
};

/// Rounds grouped by P_n(cls) into [j w, (j+1) w); forecasts equal to 1 fall
/// in the last bin. Only occupied bins are returned. Indicator bins are a
/// diagnostic: the guarantees cover the kernel statistic, not this table.
std::vector<CalibrationBin> calibration_bins(const Transcript& t, double width, std::size_t cls);

/// f = sum_j c_j k(w_j, .), a finite representer combination.
class TestFunction {
public:
    TestFunction(KernelSpec spec, std::vector<ForecastPoint> anchors, std::vector<double> coeffs);

    double operator()(const PointView& z) const;
    /// |f|_F = sqrt(sum c_j c_j' k(w_j, w_j')).
    double norm() const noexcept { return norm_; }

    const KernelSpec& spec() const noexcept { return spec_; }
    const std::vector<ForecastPoint>& anchors() const noexcept { return anchors_; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }

private:
    KernelSpec spec_;
    std::vector<ForecastPoint> anchors_;
    std::vector<double> coeffs_;
    double norm_;
};

struct Discrepancy {
    double statistic = 0.0;  // |sum_n f(x_n, P_n, y_n) - E_{P_n} f(x_n, P_n, .)|
    double bound = 0.0;      // 2 c_F |f| sqrt(N)
    double ratio = 0.0;
    double norm = 0.0;
};

/// Throws DegenerateFunctionError when |f| = 0.
Discrepancy kernel_discrepancy(const Transcript& t, const TestFunction& f);

struct RegretReport {
    double predictor_loss = 0.0;
    double rule_loss = 0.0;
    double regret = 0.0;
    double bound = 0.0;
    std::size_t rounds = 0;
};

/// sqrt(c_loss^2 + 4 c_kernel^2) (norm + 1) sqrt(N) + 1.
double regret_bound(double c_loss, double c_kernel, double norm, std::size_t rounds);

/// Exact loss sums of the transcript's predictions against `rule`; the
/// bound is evaluated at `norm_estimate` for |lambda_D|_F.
RegretReport regret(const Transcript& t, const PredictionRule& rule, const LossSpec& loss, double c_kernel,
                    double norm_estimate);

struct HoeffdingReport {
    double deviation = 0.0;
    double band = 0.0;
};

/// c_lambda sqrt(2 ln(1/delta)) sqrt(N).
double hoeffding_width(double c_loss, double delta, std::size_t rounds);

/// Binary losses with predictions sampled as Bernoulli(gamma_n) on {0, 1}:
/// sum_n (lambda(g_n) - E lambda(gamma_n)) - (lambda(d_n) - E lambda(D(x_n))).
HoeffdingReport hoeffding_band(const Transcript& t, const PredictionRule& rule, const LossSpec& loss, double delta);

/// Expected loss at outcome y of the prediction sampled as Bernoulli(gamma).
double randomized_loss(const LossSpec& loss, double gamma, std::size_t y);

/// Ridge fit of a representer combination to target values at the anchors.
TestFunction fit_representer(const KernelSpec& spec, std::vector<ForecastPoint> anchors,
                             const std::vector<double>& targets, double ridge);

struct MetricRow {
    std::string metric;
    std::string params;
    std::size_t rounds = 0;
    double statistic = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
};

/// Header metric,params,N,statistic,bound,ratio; reals with 12 significant digits.
void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace defcast
