#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "defcast/simplex.hpp"
#include "json.hpp"

namespace defcast {

/// Source of data and outcomes for a game.
struct StreamSpec {
    enum class Kind {
        alternating_parity,   // x_n = n mod 2, y_n = 1 on odd rounds
        sign_flip_adversary,  // ternary datum, outcome contradicts the prediction
        bernoulli,            // x uniform on [0,1]^dim, y ~ categorical(probs)
        logistic_rule,        // x uniform on [-1,1]^dim, y ~ sigmoid / softmax(W x + b)
        ramp,                 // x_n = n (unbounded), y_n = n mod 2
        sequence,             // explicit (x, y) lists
        csv_replay,           // rows x_1, ..., x_d, y
        jsonl_replay,         // x and y columns of a saved transcript
    };

    Kind kind = Kind::bernoulli;
    std::size_t dim = 1;
    std::vector<double> probs{0.5, 0.5};
    std::vector<std::vector<double>> weights;
    std::vector<double> bias;
    std::uint64_t seed = 0;
    std::string path;
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;

    static StreamSpec bernoulli(double theta, std::uint64_t seed, std::size_t dim = 1);
    static StreamSpec categorical(std::vector<double> probs, std::uint64_t seed, std::size_t dim = 1);
    static StreamSpec logistic(std::vector<std::vector<double>> weights, std::vector<double> bias, std::uint64_t seed);
    static StreamSpec alternating_parity();
    static StreamSpec sign_flip_adversary();
    static StreamSpec ramp();
    static StreamSpec sequence(std::vector<std::vector<double>> xs, std::vector<std::size_t> ys);
    static StreamSpec csv_replay(std::string path);
    static StreamSpec jsonl_replay(std::string path);

    /// Observation classes the stream produces.
    std::size_t classes() const;
};

nlohmann::json stream_to_json(const StreamSpec& s);
StreamSpec stream_from_json(const nlohmann::json& j);

/// Interactive Reality: datum(n) is called before the forecast of round n,
/// outcome(n, ...) after it. Rounds are visited in order starting at 1.
class Stream {
public:
    virtual ~Stream() = default;

    virtual std::vector<double> datum(std::size_t n) = 0;
    /// `gamma` is the round's prediction when the game runs in decide mode.
    virtual std::size_t outcome(std::size_t n, const Simplex& p, const std::vector<double>* gamma) = 0;
    /// Number of available rounds for finite sources.
    virtual std::optional<std::size_t> available() const { return std::nullopt; }
};

std::unique_ptr<Stream> make_stream(const StreamSpec& spec);

}  // namespace defcast
