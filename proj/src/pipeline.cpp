#include "idelog/pipeline.hpp"

#include "idelog/io.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace idelog {

std::string to_string(Extractor e) { return e == Extractor::idelog ? "idelog" : "xzero"; }

Extractor extractor_from_string(const std::string& name) {
    if (name == "idelog") return Extractor::idelog;
    if (name == "xzero") return Extractor::xzero;
    throw InputError("unknown extractor '" + name + "' (expected idelog or xzero)");
}

void PipelineConfig::validate() const {
    if (!(rate > 0.0)) throw InputError("config: rate must be positive");
    if (!(path_scale > 0.0)) throw InputError("config: path_scale must be positive");
    if (smooth.enabled) design_lowpass(smooth, rate);
    if (!(segmentation.min_prominence >= 0.0) || !(segmentation.min_lobe_duration >= 0.0)) {
        throw InputError("config: segmentation thresholds must be non-negative");
    }
    if (!(kinematic.delay >= 0.0)) throw InputError("config: kinematic delay must be non-negative");
    if (!(kinematic.mu_min < kinematic.mu_max) || !(0.0 < kinematic.sigma_min && kinematic.sigma_min < kinematic.sigma_max)) {
        throw InputError("config: invalid kinematic bounds");
    }
    refine.validate();
    xzero.validate();
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["rate"] = rate;
    j["extractor"] = to_string(extractor);
    j["path_scale"] = path_scale;
    j["smooth"] = {{"enabled", smooth.enabled},
                   {"family", smooth.family == FilterFamily::chebyshev1 ? "chebyshev1" : "butterworth"},
                   {"order", smooth.order},
                   {"cutoff_hz", smooth.cutoff_hz},
                   {"ripple_db", smooth.ripple_db}};
    j["segmentation"] = {{"filter_enabled", segmentation.filter_enabled},
                         {"min_prominence", segmentation.min_prominence},
                         {"min_lobe_duration", segmentation.min_lobe_duration}};
    j["kinematic"] = {{"delay", kinematic.delay},
                      {"mu_min", kinematic.mu_min},
                      {"mu_max", kinematic.mu_max},
                      {"sigma_min", kinematic.sigma_min},
                      {"sigma_max", kinematic.sigma_max},
                      {"max_iterations", kinematic.max_iterations},
                      {"gradient_tolerance", kinematic.gradient_tolerance},
                      {"step_tolerance", kinematic.step_tolerance}};
    j["refine"] = {{"eta", refine.eta},
                   {"passes", refine.passes},
                   {"stop_delta_db", refine.stop_delta_db},
                   {"matching", refine.matching == SalientMatching::by_order ? "by_order" : "nearest_time"}};
    j["xzero"] = {{"snr_target", xzero.snr_target},
                  {"max_strokes", xzero.max_strokes ? nlohmann::json(*xzero.max_strokes) : nlohmann::json(nullptr)},
                  {"min_stroke_area", xzero.min_stroke_area},
                  {"min_peak", xzero.min_peak},
                  {"mu_min", xzero.mu_min},
                  {"mu_max", xzero.mu_max},
                  {"sigma_min", xzero.sigma_min},
                  {"sigma_max", xzero.sigma_max}};
    return j;
}

namespace {

// Reads known keys of one config section into fields; anything else is an error.
class Section {
public:
    Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw InputError("config: '" + name_ + "' must be an object");
    }

    template <class T>
    void read(const char* key, T& field) {
        seen_.push_back(key);
        if (!j_.contains(key)) return;
        try {
            field = j_[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw InputError("config: bad value for '" + name_ + "." + key + "'");
        }
    }

    const nlohmann::json* child(const char* key) {
        seen_.push_back(key);
        return j_.contains(key) ? &j_[key] : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
                throw InputError("config: unknown key '" + (name_.empty() ? k : name_ + "." + k) + "'");
            }
        }
    }

private:
    const nlohmann::json& j_;
    std::string name_;
    std::vector<std::string> seen_;
};

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
    PipelineConfig c;
    Section top(doc, "");
    top.read("rate", c.rate);
    top.read("path_scale", c.path_scale);
    std::string extractor = to_string(c.extractor);
    top.read("extractor", extractor);
    c.extractor = extractor_from_string(extractor);

    if (const auto* j = top.child("smooth")) {
        Section s(*j, "smooth");
        s.read("enabled", c.smooth.enabled);
        std::string family = c.smooth.family == FilterFamily::chebyshev1 ? "chebyshev1" : "butterworth";
        s.read("family", family);
        if (family != "chebyshev1" && family != "butterworth") throw InputError("config: unknown filter family '" + family + "'");
        c.smooth.family = family == "chebyshev1" ? FilterFamily::chebyshev1 : FilterFamily::butterworth;
        s.read("order", c.smooth.order);
        s.read("cutoff_hz", c.smooth.cutoff_hz);
        s.read("ripple_db", c.smooth.ripple_db);
        s.finish();
    }
    if (const auto* j = top.child("segmentation")) {
        Section s(*j, "segmentation");
        s.read("filter_enabled", c.segmentation.filter_enabled);
        s.read("min_prominence", c.segmentation.min_prominence);
        s.read("min_lobe_duration", c.segmentation.min_lobe_duration);
        s.finish();
    }
    if (const auto* j = top.child("kinematic")) {
        Section s(*j, "kinematic");
        s.read("delay", c.kinematic.delay);
        s.read("mu_min", c.kinematic.mu_min);
        s.read("mu_max", c.kinematic.mu_max);
        s.read("sigma_min", c.kinematic.sigma_min);
        s.read("sigma_max", c.kinematic.sigma_max);
        s.read("max_iterations", c.kinematic.max_iterations);
        s.read("gradient_tolerance", c.kinematic.gradient_tolerance);
        s.read("step_tolerance", c.kinematic.step_tolerance);
        s.finish();
    }
    if (const auto* j = top.child("refine")) {
        Section s(*j, "refine");
        s.read("eta", c.refine.eta);
        s.read("passes", c.refine.passes);
        s.read("stop_delta_db", c.refine.stop_delta_db);
        std::string matching = c.refine.matching == SalientMatching::by_order ? "by_order" : "nearest_time";
        s.read("matching", matching);
        if (matching != "by_order" && matching != "nearest_time") throw InputError("config: unknown matching '" + matching + "'");
        c.refine.matching = matching == "by_order" ? SalientMatching::by_order : SalientMatching::nearest_time;
        s.finish();
    }
    if (const auto* j = top.child("xzero")) {
        Section s(*j, "xzero");
        s.read("snr_target", c.xzero.snr_target);
        if (const auto* m = s.child("max_strokes"); m && !m->is_null()) {
            if (!m->is_number_unsigned()) throw InputError("config: xzero.max_strokes must be a positive integer or null");
            c.xzero.max_strokes = m->get<std::size_t>();
        }
        s.read("min_stroke_area", c.xzero.min_stroke_area);
        s.read("min_peak", c.xzero.min_peak);
        s.read("mu_min", c.xzero.mu_min);
        s.read("mu_max", c.xzero.mu_max);
        s.read("sigma_min", c.xzero.sigma_min);
        s.read("sigma_max", c.xzero.sigma_max);
        s.finish();
    }
    top.finish();
    c.validate();
    return c;
}

std::string PipelineConfig::digest() const { return fnv1a_hex(to_json().dump()); }

namespace {

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(std::string(name) + ": " + e.what());
    }
}

// Drops lobes with no area by removing one of their bounding minima.
void merge_empty_lobes(VelocityMinima& minima, const SpeedProfile& speed, std::vector<std::string>& log) {
    for (;;) {
        const auto lobes = extract_lobes(speed, minima);
        auto empty = std::find_if(lobes.begin(), lobes.end(), [&](const VelocityLobe& l) {
            return !(trapezoid(l.values, l.dt) > 0.0);
        });
        if (empty == lobes.end()) return;
        if (lobes.size() == 1) throw NumericError("the speed profile is identically zero");
        const std::size_t j = empty->stroke_index;
        // Remove the interior minimum shared with a neighbour.
        const std::size_t drop = j < lobes.size() ? j : j - 1;
        log.push_back("stroke " + std::to_string(j) + " has a zero-area lobe; merged with its neighbour");
        minima.times.erase(minima.times.begin() + static_cast<long>(drop));
        minima.indices.erase(minima.indices.begin() + static_cast<long>(drop));
    }
}

ActionPlan plan_from_model(const SigmaLognormalModel& m) {
    ActionPlan plan;
    plan.target_points.push_back(m.origin);
    for (const auto& s : m.strokes) {
        plan.target_points.push_back(target_point(s, plan.target_points.back()));
        plan.angles.push_back({s.theta_s, s.theta_e});
        plan.amplitudes.push_back(s.D);
    }
    return plan;
}

}  // namespace

DecompositionResult decompose(const RawSignature& raw, const PipelineConfig& cfg) {
    stage("config", [&] { cfg.validate(); return 0; });
    DecompositionResult r;
    r.extractor = cfg.extractor;
    r.config_digest = cfg.digest();

    r.observed = stage("preprocess", [&] {
        raw.validate();
        auto traj = resample(raw, cfg.rate).trajectory;
        if (traj.size() < 3) throw InputError("signature shorter than three resampled points");
        return smooth(traj, cfg.smooth);
    });
    r.observed_speed = stage("velocity", [&] { return speed_profile(r.observed); });
    const TimeGrid grid = r.observed.grid();

    if (cfg.extractor == Extractor::xzero) {
        auto x = stage("xzero", [&] { return extract_all(r.observed_speed, r.observed, cfg.xzero); });
        r.model = std::move(x.model);
        r.plan = plan_from_model(r.model);
        r.initial_model = r.model;
        r.log.push_back("xzero: " + std::to_string(r.model.strokes.size()) + " strokes, " +
                        std::to_string(x.rejected) + " candidates rejected");
    } else {
        const auto path = stage("path", [&] { return eight_connected(r.observed, cfg.path_scale); });
        auto minima = stage("segmentation", [&] {
            auto m = find_velocity_minima(r.observed_speed, cfg.segmentation);
            merge_empty_lobes(m, r.observed_speed, r.log);
            return m;
        });
        const auto lobes = stage("segmentation", [&] { return extract_lobes(r.observed_speed, minima); });
        r.salient = stage("salient points", [&] { return locate_salient_points(minima, r.observed, &path); });

        r.fits = stage("kinematic fit", [&] {
            std::vector<KinematicFit> fits;
            for (const auto& lobe : lobes) {
                fits.push_back(fit_lobe(lobe, minima.times[lobe.stroke_index - 1], cfg.kinematic));
                if (!fits.back().converged) {
                    r.log.push_back("stroke " + std::to_string(lobe.stroke_index) + ": fit stopped before convergence");
                }
            }
            return fits;
        });
        r.plan = stage("spatial fit", [&] { return build_action_plan(r.salient, path); });

        SigmaLognormalModel model;
        model.duration = grid.end_time();
        for (const auto& f : r.fits) {
            LognormalStroke s;
            s.t0 = f.t0;
            s.mu = f.mu;
            s.sigma = f.sigma;
            model.strokes.push_back(s);
        }
        apply_plan(r.plan, model);
        r.initial_model = model;

        auto refined = stage("refine", [&] {
            return refine(model, r.plan, r.salient, r.observed, r.observed_speed, cfg.refine, cfg.segmentation);
        });
        r.plan = std::move(refined.plan);
        r.model = std::move(refined.model);
        r.trace = std::move(refined.trace);
        for (std::size_t j : r.trace.unmatched) {
            r.log.push_back("salient point " + std::to_string(j) + " had no reconstructed counterpart");
        }
    }
    r.model.duration = grid.end_time();

    stage("report", [&] {
        const auto initial = synthesize_trajectory(r.initial_model, grid, cfg.segmentation);
        r.initial_report = make_report(r.initial_model, r.observed, r.observed_speed, initial, cfg.smooth.enabled);
        r.reconstruction = synthesize_trajectory(r.model, grid, cfg.segmentation);
        r.report = make_report(r.model, r.observed, r.observed_speed, r.reconstruction, cfg.smooth.enabled);
        return 0;
    });
    return r;
}

std::vector<CorpusEntry> decompose_corpus(const std::vector<RawSignature>& corpus, const PipelineConfig& cfg,
                                          unsigned threads) {
    std::vector<CorpusEntry> out(corpus.size());
    auto run = [&](std::size_t i) {
        try {
            out[i].outcome = decompose(corpus[i], cfg);
        } catch (const NumericError& e) {
            out[i].outcome = std::string(e.what());
            out[i].error_kind = 3;
        } catch (const Error& e) {
            out[i].outcome = std::string(e.what());
            out[i].error_kind = 2;
        }
    };
    const unsigned n = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    if (n <= 1 || corpus.size() <= 1) {
        for (std::size_t i = 0; i < corpus.size(); ++i) run(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(n, corpus.size()); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < corpus.size(); i = next++) run(i);
            });
        }
    }
    return out;
}

}  // namespace idelog
