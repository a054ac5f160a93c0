#include "defcast/game.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>

#include "defcast/errors.hpp"
#include "defcast/skeptic.hpp"
#include "defcast/stream.hpp"

namespace defcast {

namespace {

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// The forecasting side of one game plus the Skeptics that watch it.
class Player {
public:
    explicit Player(const RunConfig& c) : config_(c), m_(c.classes()) { restart(); }

    void restart() {
        if (config_.mode == Mode::decide) {
            master_.emplace(config_.kernel, DecisionConfig{*config_.loss, config_.epsilon_floor}, config_.tolerances);
        } else {
            engine_.emplace(config_.kernel, m_, config_.tolerances);
        }
        if (config_.mode == Mode::test) quadratic_.emplace(config_.kernel, m_);
        const double c_kernel = imbedding_constant(config_.kernel);
        double c = 2.0 * c_kernel;
        if (config_.mode == Mode::decide) {
            const double cl = config_.loss->range();
            c = std::sqrt(cl * cl + 4.0 * c_kernel * c_kernel);
        }
        mixture_.emplace(config_.mixture_c.value_or(c));
        if (m_ == 2) slln_.emplace();
    }

    struct Move {
        Simplex p = Simplex::uniform(2);
        std::optional<MasterStep> step;
        double cert = 0.0;
    };

    Move forecast(const std::vector<double>& x) {
        Move mv;
        switch (config_.mode) {
            case Mode::forecast: {
                Certificate cert;
                mv.p = defensive_forecast(*engine_, x, nullptr, &cert);
                mv.cert = cert.max_gain;
                break;
            }
            case Mode::decide: {
                mv.step = master_->predict(x);
                mv.p = mv.step->p;
                mv.cert = mv.step->certificate.max_gain;
                break;
            }
            case Mode::test: {
                mv.p = config_.forecast ? Simplex(*config_.forecast) : Simplex::uniform(m_);
                const auto g = quadratic_->bet(x, mv.p);
                mv.cert = *std::max_element(g.begin(), g.end());
                break;
            }
        }
        return mv;
    }

    void observe(const std::vector<double>& x, const Move& mv, std::size_t y, RoundRecord& rec) {
        double gain = 0.0;
        double capital = 0.0;
        switch (config_.mode) {
            case Mode::forecast:
                gain = engine_->observe(x, mv.p, y).gain;
                capital = engine_->capital();
                break;
            case Mode::decide:
                gain = master_->observe(x, *mv.step, y).gain;
                capital = master_->state().capital();
                break;
            case Mode::test:
                gain = quadratic_->step(x, mv.p, y);
                capital = quadratic_->capital();
                break;
        }
        mixture_->step(gain);
        rec.cap["quadratic"] = capital;
        rec.cap["mixture"] = mixture_->capital();
        if (slln_) {
            slln_->step(mv.p, y);
            rec.cap["slln"] = slln_->capital();
        }
    }

private:
    const RunConfig& config_;
    std::size_t m_;
    std::optional<ForecastState> engine_;
    std::optional<MasterPredictor> master_;
    std::optional<QuadraticSkeptic> quadratic_;
    std::optional<MixtureSkeptic> mixture_;
    std::optional<SllnSkeptic> slln_;
};

Transcript play(const RunConfig& config, bool doubling) {
    config.validate();
    if (doubling && (!(config.doubling.radius > 0.0) || !(config.doubling.factor > 1.0))) {
        throw InputError("doubling needs a positive radius and a factor above 1");
    }
    StreamSpec spec = config.stream;
    if (config.seed) spec.seed = *config.seed;
    auto stream = make_stream(spec);
    const std::size_t rounds = config.rounds.value_or(stream->available().value_or(100));
    const std::size_t m = config.classes();

    Transcript t;
    t.metadata = {{"mode", mode_name(config.mode)},
                  {"rounds", rounds},
                  {"classes", m},
                  {"seed", spec.seed},
                  {"stream", stream_to_json(spec)},
                  {"kernel", kernel_to_json(config.kernel)},
                  {"kernel_constant", imbedding_constant(config.kernel)}};
    if (config.loss) t.metadata["loss"] = loss_to_json(*config.loss);
    if (doubling) t.metadata["doubling"] = {{"radius", config.doubling.radius}, {"factor", config.doubling.factor}};
    t.rounds.reserve(rounds);

    std::mt19937_64 sampler(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Player player(config);
    double radius = config.doubling.radius;

    for (std::size_t n = 1; n <= rounds; ++n) {
        RoundRecord rec;
        rec.n = n;
        rec.x = stream->datum(n);
        for (double v : rec.x) {
            if (!std::isfinite(v)) throw InputError("stream produced a non-finite datum at round " + std::to_string(n));
        }

        std::vector<double> seen = rec.x;
        if (doubling) {
            const double r = norm2(rec.x);
            while (r >= radius) {
                radius *= config.doubling.factor;
                ++rec.escalations;
            }
            if (rec.escalations > 0) player.restart();
            rec.radius = radius;
            const double scale = config.doubling.radius / radius;
            for (double& v : seen) v *= scale;
        }

        Player::Move mv;
        try {
            mv = player.forecast(seen);
        } catch (const SolverFailure& e) {
            throw SolverFailure(e.what(), n);
        }
        rec.p = mv.p.vec();
        rec.cert = mv.cert;

        const std::vector<double>* gamma = nullptr;
        if (mv.step) {
            rec.gamma = mv.step->gamma;
            gamma = &*rec.gamma;
            if (config.randomize) {
                rec.g_sample = std::vector<double>{unit(sampler) < (*rec.gamma)[0] ? 1.0 : 0.0};
                const double d = config.rule ? (*config.rule)(rec.x).at(0) : (*rec.gamma)[0];
                rec.d_sample = std::vector<double>{unit(sampler) < d ? 1.0 : 0.0};
            }
        }

        rec.y = stream->outcome(n, mv.p, gamma);
        if (rec.y >= m) throw InputError("stream outcome out of range at round " + std::to_string(n));
        if (rec.gamma) rec.loss = config.loss->value(*rec.gamma, rec.y);

        player.observe(seen, mv, rec.y, rec);
        t.rounds.push_back(std::move(rec));
    }
    return t;
}

}  // namespace

Transcript run_game(const RunConfig& config) { return play(config, config.doubling.enabled); }

Transcript doubling_wrapper(const RunConfig& config) { return play(config, true); }

}  // namespace defcast
