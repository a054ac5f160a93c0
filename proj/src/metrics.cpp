#include "defcast/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include <Eigen/Dense>

#include "defcast/errors.hpp"

namespace defcast {

std::vector<CalibrationBin> calibration_bins(const Transcript& t, double width, std::size_t cls) {
    if (!(width > 0.0 && width <= 1.0)) throw InputError("bin width must be in (0, 1]");
    const auto bins = static_cast<std::size_t>(std::ceil(1.0 / width - 1e-12));
    std::map<std::size_t, CalibrationBin> table;
    for (const auto& r : t.rounds) {
        if (cls >= r.p.size()) throw InputError("class index out of range");
        const double q = r.p[cls];
        const std::size_t j = std::min(static_cast<std::size_t>(std::floor(q / width)), bins - 1);
        auto& b = table[j];
        b.index = j;
        b.lo = static_cast<double>(j) * width;
        b.hi = std::min(1.0, static_cast<double>(j + 1) * width);
        ++b.count;
        b.mean_forecast += q;
        b.frequency += r.y == cls ? 1.0 : 0.0;
    }
    std::vector<CalibrationBin> out;
    for (auto& [j, b] : table) {
        b.mean_forecast /= static_cast<double>(b.count);
        b.frequency /= static_cast<double>(b.count);
        b.deviation = std::abs(b.frequency - b.mean_forecast);
        out.push_back(b);
    }
    return out;
}

TestFunction::TestFunction(KernelSpec spec, std::vector<ForecastPoint> anchors, std::vector<double> coeffs)
    : spec_(std::move(spec)), anchors_(std::move(anchors)), coeffs_(std::move(coeffs)) {
    if (anchors_.empty()) throw DegenerateFunctionError("test function needs at least one anchor");
    if (anchors_.size() != coeffs_.size()) throw InputError("test function needs one coefficient per anchor");
    double sq = 0.0;
    for (std::size_t a = 0; a < anchors_.size(); ++a) {
        for (std::size_t b = 0; b < anchors_.size(); ++b) {
            sq += coeffs_[a] * coeffs_[b] * eval_kernel(spec_, anchors_[a].view(), anchors_[b].view());
        }
    }
    norm_ = std::sqrt(std::max(sq, 0.0));
}

double TestFunction::operator()(const PointView& z) const {
    double s = 0.0;
    for (std::size_t j = 0; j < anchors_.size(); ++j) s += coeffs_[j] * eval_kernel(spec_, anchors_[j].view(), z);
    return s;
}

Discrepancy kernel_discrepancy(const Transcript& t, const TestFunction& f) {
    if (!(f.norm() > 0.0)) throw DegenerateFunctionError("test function has zero norm");
    double sum = 0.0;
    for (const auto& r : t.rounds) {
        double mean = 0.0;
        for (std::size_t y = 0; y < r.p.size(); ++y) {
            if (r.p[y] != 0.0) mean += r.p[y] * f(PointView{r.x, r.p, y});
        }
        sum += f(PointView{r.x, r.p, r.y}) - mean;
    }
    Discrepancy d;
    d.norm = f.norm();
    d.statistic = std::abs(sum);
    d.bound = 2.0 * imbedding_constant(f.spec()) * f.norm() * std::sqrt(static_cast<double>(t.size()));
    d.ratio = d.bound > 0.0 ? d.statistic / d.bound : (d.statistic > 0.0 ? INFINITY : 0.0);
    return d;
}

double regret_bound(double c_loss, double c_kernel, double norm, std::size_t rounds) {
    return std::sqrt(c_loss * c_loss + 4.0 * c_kernel * c_kernel) * (norm + 1.0) *
               std::sqrt(static_cast<double>(rounds)) +
           1.0;
}

RegretReport regret(const Transcript& t, const PredictionRule& rule, const LossSpec& loss, double c_kernel,
                    double norm_estimate) {
    RegretReport rep;
    for (const auto& r : t.rounds) {
        if (!r.gamma) throw InputError("transcript round " + std::to_string(r.n) + " has no prediction");
        if (r.y >= loss.classes()) throw InputError("observation index out of range for the loss");
        rep.predictor_loss += loss.value(*r.gamma, r.y);
        const auto d = rule(r.x);
        loss.check_prediction(d);
        rep.rule_loss += loss.value(d, r.y);
    }
    rep.rounds = t.size();
    rep.regret = rep.predictor_loss - rep.rule_loss;
    rep.bound = regret_bound(loss.range(), c_kernel, norm_estimate, rep.rounds);
    return rep;
}

double hoeffding_width(double c_loss, double delta, std::size_t rounds) {
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    return c_loss * std::sqrt(2.0 * std::log(1.0 / delta)) * std::sqrt(static_cast<double>(rounds));
}

double randomized_loss(const LossSpec& loss, double gamma, std::size_t y) {
    const double one = 1.0;
    const double zero = 0.0;
    return gamma * loss.value(std::span<const double>(&one, 1), y) +
           (1.0 - gamma) * loss.value(std::span<const double>(&zero, 1), y);
}

HoeffdingReport hoeffding_band(const Transcript& t, const PredictionRule& rule, const LossSpec& loss, double delta) {
    if (loss.prediction_dim() != 1) throw InputError("randomized plays are defined for binary losses");
    HoeffdingReport rep;
    rep.band = hoeffding_width(loss.range(), delta, t.size());
    for (const auto& r : t.rounds) {
        if (!r.gamma || !r.g_sample || !r.d_sample) {
            throw InputError("transcript round " + std::to_string(r.n) + " lacks sampled predictions");
        }
        const double d = rule(r.x).at(0);
        rep.deviation += (loss.value(*r.g_sample, r.y) - randomized_loss(loss, r.gamma->at(0), r.y)) -
                         (loss.value(*r.d_sample, r.y) - randomized_loss(loss, d, r.y));
    }
    return rep;
}

TestFunction fit_representer(const KernelSpec& spec, std::vector<ForecastPoint> anchors,
                             const std::vector<double>& targets, double ridge) {
    const auto n = static_cast<Eigen::Index>(anchors.size());
    if (anchors.empty() || anchors.size() != targets.size()) throw InputError("fit needs one target per anchor");
    if (!(ridge >= 0.0)) throw InputError("ridge must be non-negative");
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            const double k = eval_kernel(spec, anchors[a].view(), anchors[b].view());
            gram(a, b) = k;
            gram(b, a) = k;
        }
    }
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
    const Eigen::MatrixXd system = gram + ridge * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd c = system.ldlt().solve(rhs);
    if (!c.allFinite()) throw InputError("representer fit is ill-conditioned; increase the ridge");
    return TestFunction(spec, std::move(anchors), std::vector<double>(c.data(), c.data() + n));
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    out << "metric,params,N,statistic,bound,ratio\n";
    for (const auto& r : rows) {
        out << r.metric << ',' << r.params << ',' << r.rounds << ',' << fmt(r.statistic) << ',' << fmt(r.bound) << ','
            << fmt(r.ratio) << '\n';
    }
}

}  // namespace defcast
