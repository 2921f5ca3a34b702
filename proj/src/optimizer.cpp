#include "idelog/optimizer.hpp"

#include "idelog/metrics.hpp"

#include <algorithm>

namespace idelog {

void RefineConfig::validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("refine: eta must lie in [0, 1]");
    if (passes < 1) throw InputError("refine: passes must be >= 1");
}

Vec2 salient_error(Vec2 sp, Vec2 spr) { return sp - spr; }

void apply_plan(const ActionPlan& plan, SigmaLognormalModel& model) {
    if (plan.stroke_count() != model.strokes.size()) throw InputError("apply_plan: stroke count mismatch");
    model.origin = plan.target_points.front();
    for (std::size_t j = 0; j < model.strokes.size(); ++j) {
        model.strokes[j].theta_s = plan.angles[j].theta_s;
        model.strokes[j].theta_e = plan.angles[j].theta_e;
        model.strokes[j].D = plan.amplitudes[j];
    }
}

std::vector<std::optional<Vec2>> match_salient_points(const SalientPointSet& observed,
                                                      const SalientPointSet& reconstructed,
                                                      SalientMatching matching) {
    const std::size_t n = observed.size();
    std::vector<std::optional<Vec2>> out(n);
    if (n < 3) return out;
    const std::size_t rec_interior = reconstructed.size() >= 2 ? reconstructed.size() - 2 : 0;

    if (matching == SalientMatching::by_order) {
        for (std::size_t j = 1; j + 1 < n; ++j) {
            if (j <= rec_interior) out[j] = reconstructed.points[j];
        }
        return out;
    }

    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double t = observed.times[j];
        const double window = 0.5 * std::min(t - observed.times[j - 1], observed.times[j + 1] - t);
        double best = window;
        for (std::size_t k = 1; k <= rec_interior; ++k) {
            const double d = std::abs(reconstructed.times[k] - t);
            if (d <= best) {
                best = d;
                out[j] = reconstructed.points[k];
            }
        }
    }
    return out;
}

namespace {

struct Evaluation {
    ReconstructedMovement movement;
    double snr_t = 0.0;
    double snr_v = 0.0;
};

Evaluation evaluate(const SigmaLognormalModel& model, const Trajectory& observed, const SpeedProfile& observed_speed,
                    const SegmentationConfig& seg) {
    Evaluation e;
    e.movement = synthesize_trajectory(model, observed.grid(), seg);
    e.snr_t = snr_t(observed, e.movement.trajectory);
    e.snr_v = snr_v(observed_speed, e.movement.speed);
    return e;
}

// Reconstructed position paired with observed salient point j.
std::optional<Vec2> paired_point(const SalientPointSet& observed, const ReconstructedMovement& rec, std::size_t j,
                                 SalientMatching matching) {
    auto pairs = match_salient_points(observed, rec.reconstructed_salient_points, matching);
    if (pairs[j]) return pairs[j];
    if (matching == SalientMatching::nearest_time) {
        return rec.trajectory.points[std::min(observed.indices[j], rec.trajectory.size() - 1)];
    }
    return std::nullopt;
}

}  // namespace

RefineResult refine(const SigmaLognormalModel& model, const ActionPlan& plan, const SalientPointSet& observed,
                    const Trajectory& observed_traj, const SpeedProfile& observed_speed, const RefineConfig& cfg,
                    const SegmentationConfig& seg) {
    cfg.validate();
    const std::size_t n = plan.stroke_count();
    if (observed.size() != n + 1 || plan.target_points.size() != n + 1 || model.strokes.size() != n) {
        throw InputError("refine: plan, model and salient points disagree on the stroke count");
    }

    ActionPlan work_plan = plan;
    SigmaLognormalModel work_model = model;
    apply_plan(work_plan, work_model);

    RefineResult best{work_plan, work_model, {}};
    auto current = evaluate(work_model, observed_traj, observed_speed, seg);
    best.trace.initial = {current.snr_t, current.snr_v, 0.0};
    double best_snr = current.snr_t;
    double previous_snr = current.snr_t;
    std::vector<std::size_t> unmatched;

    for (int pass = 1; pass <= cfg.passes; ++pass) {
        double max_error = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            const auto spr = paired_point(observed, current.movement, j, cfg.matching);
            if (!spr) {
                if (std::find(unmatched.begin(), unmatched.end(), j) == unmatched.end()) unmatched.push_back(j);
                continue;
            }
            const Vec2 es = salient_error(observed.points[j], *spr);
            max_error = std::max(max_error, norm(es));
            const Vec2 step = cfg.eta * es;
            if (step == Vec2{}) continue;
            work_plan.target_points[j] += step;
            update_stroke_geometry(work_plan, j);
            update_stroke_geometry(work_plan, j + 1);
            apply_plan(work_plan, work_model);
            current = evaluate(work_model, observed_traj, observed_speed, seg);
        }
        best.trace.passes.push_back({current.snr_t, current.snr_v, max_error});
        if (current.snr_t > best_snr) {
            best_snr = current.snr_t;
            best.plan = work_plan;
            best.model = work_model;
            best.trace.best_pass = static_cast<std::size_t>(pass);
        }
        const double gain = current.snr_t - previous_snr;
        previous_snr = current.snr_t;
        if (gain < cfg.stop_delta_db) break;
    }
    std::sort(unmatched.begin(), unmatched.end());
    best.trace.unmatched = std::move(unmatched);
    return best;
}

}  // namespace idelog
