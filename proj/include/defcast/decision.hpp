#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "defcast/forecaster.hpp"
#include "defcast/loss.hpp"
#include "json.hpp"

namespace defcast {

struct DecisionConfig {
    LossSpec loss = LossSpec::absolute();
    /// eps_n = max(2^-n, epsilon_floor).
    double epsilon_floor = 1e-4;

    double epsilon(std::size_t n) const;
};

/// Continuous approximate choice function G(x, P) for slack eps:
/// expected_loss(G(x, P), P) <= inf_gamma expected_loss(gamma, P) + eps.
std::vector<double> choice(const LossSpec& loss, std::span<const double> x, const Simplex& p, double eps);

/// Same, writing into `out` (length loss.prediction_dim()) without validating p.
void choice_into(const LossSpec& loss, std::span<const double> p, double eps, std::span<double> out);

/// A prediction rule D: X -> Gamma used as a competitor.
class PredictionRule {
public:
    enum class Kind { constant, table, logistic };

    static PredictionRule constant(std::vector<double> gamma);
    /// Exact-match lookup from datum to prediction.
    static PredictionRule table(std::vector<std::pair<std::vector<double>, std::vector<double>>> entries);
    /// One weight row: sigmoid(w . x + b). Several rows: softmax over the rows.
    static PredictionRule logistic(std::vector<std::vector<double>> weights, std::vector<double> bias);

    Kind kind() const noexcept { return kind_; }
    std::vector<double> operator()(std::span<const double> x) const;

    nlohmann::json to_json() const;
    static PredictionRule from_json(const nlohmann::json& j);

private:
    Kind kind_ = Kind::constant;
    std::vector<double> gamma_;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> table_;
    std::vector<std::vector<double>> weights_;
    std::vector<double> bias_;
};

/// Scalar feature x, P, y -> lambda(x, G(x, P), y) for the choice function at slack eps.
ScalarFeature loss_feature(const LossSpec& loss, double eps);

struct MasterStep {
    std::size_t n = 0;
    Simplex p = Simplex::uniform(2);
    std::vector<double> gamma;
    double epsilon = 0.0;
    Certificate certificate;
};

/// One round of the competitive predictor: neutralize the merged gain (scalar
/// loss-difference channel plus the kernel channel of `state`), then choose.
MasterStep master_predict_step(const ForecastState& state, const DecisionConfig& config, std::span<const double> x,
                               std::size_t n);

/// Stateful driver pairing a ForecastState with the decision layer.
class MasterPredictor {
public:
    MasterPredictor(KernelSpec kernel, DecisionConfig config, ForecastConfig forecast = {});

    /// Round index of the next prediction (1-based, counted since the last reset).
    std::size_t next_round() const noexcept { return state_.size() + 1; }

    MasterStep predict(std::span<const double> x) const;
    ObserveResult observe(std::span<const double> x, const MasterStep& step, std::size_t y);
    void reset() { state_.reset(); }

    const ForecastState& state() const noexcept { return state_; }
    const DecisionConfig& config() const noexcept { return config_; }

private:
    DecisionConfig config_;
    ForecastState state_;
};

}  // namespace defcast
