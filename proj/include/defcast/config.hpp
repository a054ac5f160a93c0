#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "defcast/decision.hpp"
#include "defcast/forecaster.hpp"
#include "defcast/kernel.hpp"
#include "defcast/loss.hpp"
#include "defcast/stream.hpp"
#include "json.hpp"

namespace defcast {

enum class Mode { forecast, decide, test };

struct DoublingConfig {
    bool enabled = false;
    double radius = 1.0;  // R_0
    double factor = 2.0;
};

/// Everything needed to play one game. JSON keys mirror the fields:
///
///     {"mode": "decide", "rounds": 1000, "seed": 7,
///      "stream": {"kind": "bernoulli", "theta": 0.7},
///      "kernel": {"type": "gaussian", "sigma": 1.0},
///      "loss": {"kind": "absolute"},
///      "tolerances": {"neutral": 1e-6, "binary": 1e-9},
///      "epsilon_floor": 1e-4,
///      "doubling": {"enabled": true, "radius": 1.0, "factor": 2.0},
///      "randomize": true, "rule": {"kind": "constant", "gamma": 0.5},
///      "forecast": [0.1, 0.9], "mixture_c": 2.0}
struct RunConfig {
    Mode mode = Mode::forecast;
    std::optional<std::size_t> rounds;  // defaults to the source length, else 100
    std::optional<std::uint64_t> seed;  // overrides the stream seed
    StreamSpec stream;
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    std::optional<LossSpec> loss;
    ForecastConfig tolerances;
    double epsilon_floor = 1e-4;
    DoublingConfig doubling;
    bool randomize = false;                 // decide mode: sample predictions on {0, 1}
    std::optional<PredictionRule> rule;     // competitor sampled alongside the prediction
    std::optional<std::vector<double>> forecast;  // test mode: the constant forecast under test
    std::optional<double> mixture_c;        // bound on |Psi| for the mixture Skeptic

    /// Observation class count implied by the loss or the stream.
    std::size_t classes() const;
    /// Throws InputError on inconsistent settings.
    void validate() const;
};

const char* mode_name(Mode m);
Mode mode_from_string(const std::string& s);

nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace defcast
