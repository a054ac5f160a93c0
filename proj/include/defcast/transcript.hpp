#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace defcast {

/// One played round.
struct RoundRecord {
    std::size_t n = 0;
    std::vector<double> x;
    std::vector<double> p;
    std::optional<std::vector<double>> gamma;
    std::size_t y = 0;
    std::optional<double> loss;
    std::map<std::string, double> cap;      // Skeptic capitals after the round
    std::optional<double> cert;             // max_y g(y, P_n) at the emitted forecast
    std::size_t escalations = 0;            // radius escalations triggered this round
    std::optional<double> radius;           // working radius after escalation
    std::optional<std::vector<double>> g_sample;  // sampled prediction
    std::optional<std::vector<double>> d_sample;  // sampled rule prediction

    bool operator==(const RoundRecord&) const = default;
};

struct Transcript {
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<RoundRecord> rounds;

    std::size_t size() const noexcept { return rounds.size(); }
    std::size_t total_escalations() const noexcept;

    /// Checks contiguous 1-based indices and valid forecasts; throws InputError.
    void validate() const;
};

nlohmann::json record_to_json(const RoundRecord& r);
RoundRecord record_from_json(const nlohmann::json& j);

/// One JSON object per line; reals use the shortest round-trip decimal form.
void write_jsonl(std::ostream& out, const Transcript& t);
Transcript read_jsonl(std::istream& in);

void save_transcript(const std::string& path, const Transcript& t);
Transcript load_transcript(const std::string& path);

}  // namespace defcast
