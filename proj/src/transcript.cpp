#include "defcast/transcript.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "defcast/errors.hpp"
#include "defcast/simplex.hpp"

namespace defcast {

std::size_t Transcript::total_escalations() const noexcept {
    std::size_t s = 0;
    for (const auto& r : rounds) s += r.escalations;
    return s;
}

void Transcript::validate() const {
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        const auto& r = rounds[i];
        if (r.n != i + 1) throw InputError("round indices are not contiguous from 1");
        Simplex check(r.p);
        if (r.y >= r.p.size()) throw InputError("observation index out of range at round " + std::to_string(r.n));
    }
}

nlohmann::json record_to_json(const RoundRecord& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["x"] = r.x;
    j["p"] = r.p;
    if (r.gamma) j["gamma"] = *r.gamma;
    j["y"] = r.y;
    if (r.loss) j["loss"] = *r.loss;
    if (!r.cap.empty()) j["cap"] = r.cap;
    if (r.cert) j["cert"] = *r.cert;
    if (r.escalations > 0) j["escalations"] = r.escalations;
    if (r.radius) j["radius"] = *r.radius;
    if (r.g_sample) j["g_sample"] = *r.g_sample;
    if (r.d_sample) j["d_sample"] = *r.d_sample;
    return j;
}

RoundRecord record_from_json(const nlohmann::json& j) {
    try {
        RoundRecord r;
        r.n = j.at("n").get<std::size_t>();
        r.x = j.at("x").get<std::vector<double>>();
        r.p = j.at("p").get<std::vector<double>>();
        if (j.contains("gamma")) r.gamma = j["gamma"].get<std::vector<double>>();
        r.y = j.at("y").get<std::size_t>();
        if (j.contains("loss")) r.loss = j["loss"].get<double>();
        if (j.contains("cap")) r.cap = j["cap"].get<std::map<std::string, double>>();
        if (j.contains("cert")) r.cert = j["cert"].get<double>();
        r.escalations = j.value("escalations", std::size_t{0});
        if (j.contains("radius")) r.radius = j["radius"].get<double>();
        if (j.contains("g_sample")) r.g_sample = j["g_sample"].get<std::vector<double>>();
        if (j.contains("d_sample")) r.d_sample = j["d_sample"].get<std::vector<double>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad transcript record: ") + e.what());
    }
}

void write_jsonl(std::ostream& out, const Transcript& t) {
    for (const auto& r : t.rounds) out << record_to_json(r).dump() << '\n';
}

Transcript read_jsonl(std::istream& in) {
    Transcript t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("bad JSONL line: ") + e.what());
        }
        t.rounds.push_back(record_from_json(j));
    }
    return t;
}

void save_transcript(const std::string& path, const Transcript& t) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    write_jsonl(out, t);
    std::ofstream meta(path + ".meta.json");
    if (!meta) throw InputError("cannot open " + path + ".meta.json for writing");
    meta << t.metadata.dump(2) << '\n';
}

Transcript load_transcript(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    Transcript t = read_jsonl(in);
    std::ifstream meta(path + ".meta.json");
    if (meta) {
        try {
            t.metadata = nlohmann::json::parse(meta);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("bad transcript metadata: ") + e.what());
        }
    }
    return t;
}

}  // namespace defcast
