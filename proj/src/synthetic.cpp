#include "idelog/synthetic.hpp"

#include <algorithm>

namespace idelog {

void GeneratorConfig::validate() const {
    if (min_strokes < 1 || max_strokes < min_strokes) throw InputError("generator: invalid stroke count range");
    if (!(0.0 < min_chord && min_chord <= max_chord)) throw InputError("generator: invalid chord range");
    if (!(0.0 < min_gap && min_gap <= max_gap)) throw InputError("generator: invalid gap range");
    if (!(mu_min <= mu_max) || !(0.0 < sigma_min && sigma_min <= sigma_max)) {
        throw InputError("generator: invalid mu/sigma range");
    }
    if (!(rate > 0.0)) throw InputError("generator: rate must be positive");
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

// Arc length of a chord bent by `sweep`.
double arc_length(double chord, double sweep) {
    if (std::abs(sweep) < kStraightAngleEps) return chord;
    return chord * (0.5 * sweep) / std::sin(0.5 * sweep);
}

double end_time(const SigmaLognormalModel& m) {
    double t = 0.0;
    for (const auto& s : m.strokes) t = std::max(t, s.t0 + std::exp(s.mu + 3.0 * s.sigma));
    return t;
}

}  // namespace

SigmaLognormalModel random_model(std::mt19937_64& rng, const GeneratorConfig& cfg) {
    cfg.validate();
    std::uniform_int_distribution<int> count(cfg.min_strokes, cfg.max_strokes);
    const int k = count(rng);

    SigmaLognormalModel m;
    m.origin = {0.0, 0.0};
    double heading = uniform(rng, -kPi, kPi);
    double t0 = 0.0;
    for (int j = 0; j < k; ++j) {
        if (j > 0) {
            heading = wrap_angle(heading + uniform(rng, -cfg.max_turn, cfg.max_turn));
            t0 += uniform(rng, cfg.min_gap, cfg.max_gap);
        }
        const double chord = uniform(rng, cfg.min_chord, cfg.max_chord);
        const double sweep = uniform(rng, -cfg.max_sweep, cfg.max_sweep);
        LognormalStroke s;
        s.t0 = t0;
        s.mu = uniform(rng, cfg.mu_min, cfg.mu_max);
        s.sigma = uniform(rng, cfg.sigma_min, cfg.sigma_max);
        s.theta_s = heading - 0.5 * sweep;
        s.theta_e = heading + 0.5 * sweep;
        s.D = arc_length(chord, sweep);
        m.strokes.push_back(s);
    }
    m.duration = end_time(m);
    return m;
}

SyntheticSignature render(const SigmaLognormalModel& model, double rate, const std::string& source_id) {
    if (!(rate > 0.0)) throw InputError("render: rate must be positive");
    const double dt = 1.0 / rate;
    const auto n = static_cast<std::size_t>(std::floor(model.duration / dt + 1e-9)) + 1;
    SyntheticSignature out;
    out.model = model;
    out.trajectory = synthesize_trajectory(model, TimeGrid{0.0, dt, n}).trajectory;
    out.trajectory.pen_down.assign(n, true);
    out.raw.sampling_rate_hint = rate;
    out.raw.source_id = source_id;
    out.raw.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = out.trajectory.points[i];
        out.raw.samples.push_back({out.trajectory.time(i), p.x, p.y, 1.0, true});
    }
    return out;
}

std::vector<SyntheticSignature> generate_corpus(std::uint64_t seed, std::size_t count, const GeneratorConfig& cfg) {
    std::mt19937_64 rng(seed);
    std::vector<SyntheticSignature> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(render(random_model(rng, cfg), cfg.rate, "synthetic_" + std::to_string(i)));
    }
    return out;
}

double max_consecutive_overlap(const SigmaLognormalModel& model) {
    double worst = 0.0;
    for (std::size_t j = 1; j < model.strokes.size(); ++j) {
        const auto& a = model.strokes[j - 1];
        const auto& b = model.strokes[j];
        const double lo = std::min(a.t0, b.t0);
        const double hi = std::max(a.support_end(), b.support_end());
        constexpr int steps = 4000;
        const double h = (hi - lo) / steps;
        double s = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double t = lo + i * h;
            const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
            s += w * std::min(lognormal_pdf(t, a.t0, a.mu, a.sigma), lognormal_pdf(t, b.t0, b.mu, b.sigma));
        }
        worst = std::max(worst, s * h);
    }
    return worst;
}

bool well_separated(const SigmaLognormalModel& model, double limit) { return max_consecutive_overlap(model) < limit; }

bool is_long_movement(const SigmaLognormalModel& model, std::size_t min_strokes, double min_duration) {
    return model.strokes.size() >= min_strokes && model.duration >= min_duration;
}

std::vector<std::vector<SyntheticSignature>> generate_writers(std::uint64_t seed, std::size_t writers,
                                                              std::size_t per_writer, const GeneratorConfig& cfg,
                                                              const WriterJitter& jitter) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<SyntheticSignature>> out(writers);
    for (std::size_t w = 0; w < writers; ++w) {
        const SigmaLognormalModel proto = random_model(rng, cfg);
        for (std::size_t s = 0; s < per_writer; ++s) {
            SigmaLognormalModel m = proto;
            double shift = 0.0;
            for (std::size_t j = 0; j < m.strokes.size(); ++j) {
                auto& st = m.strokes[j];
                const auto& ps = proto.strokes[j];
                if (j > 0) {
                    const double gap = ps.t0 - proto.strokes[j - 1].t0;
                    shift += gap * jitter.timing * gauss(rng);
                }
                st.t0 = std::max(j > 0 ? m.strokes[j - 1].t0 + 0.05 : 0.0, ps.t0 + shift);
                st.mu = ps.mu + jitter.mu * gauss(rng);
                st.sigma = std::max(0.05, ps.sigma * (1.0 + jitter.sigma * gauss(rng)));
                const double turn = jitter.angle * gauss(rng);
                st.theta_s = ps.theta_s + turn + jitter.angle * gauss(rng);
                st.theta_e = ps.theta_e + turn + jitter.angle * gauss(rng);
                st.D = std::max(1.0, ps.D * (1.0 + jitter.chord * gauss(rng)));
            }
            m.duration = end_time(m);
            out[w].push_back(render(m, cfg.rate, "w" + std::to_string(w) + "_s" + std::to_string(s)));
        }
    }
    return out;
}

}  // namespace idelog
