#include "idelog/lognormal_model.hpp"

#include <algorithm>

namespace idelog {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Chord factor of an arc: 2 sin(delta / 2) / sweep, with the straight limit.
double chord_scale(double sweep, double fraction) {
    if (std::abs(sweep) < kStraightAngleEps) return fraction;
    return 2.0 * std::sin(0.5 * sweep * fraction) / sweep;
}

}  // namespace

void LognormalStroke::validate() const {
    if (!std::isfinite(D) || !std::isfinite(t0) || !std::isfinite(mu) || !std::isfinite(sigma) ||
        !std::isfinite(theta_s) || !std::isfinite(theta_e)) {
        throw InputError("lognormal stroke has non-finite parameters");
    }
    if (!(sigma > 0.0)) throw InputError("lognormal stroke needs sigma > 0");
    if (!(D > 0.0)) throw InputError("lognormal stroke needs D > 0");
}

bool SigmaLognormalModel::truncated_at_duration() const {
    return std::any_of(strokes.begin(), strokes.end(),
                       [this](const LognormalStroke& s) { return s.support_end() > duration; });
}

void SigmaLognormalModel::validate() const {
    for (const auto& s : strokes) s.validate();
    for (std::size_t j = 1; j < strokes.size(); ++j) {
        if (strokes[j].t0 < strokes[j - 1].t0) throw InputError("model strokes must be ordered by t0");
    }
    if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(duration)) {
        throw InputError("model has non-finite origin or duration");
    }
}

double lognormal_pdf(double t, double t0, double mu, double sigma) {
    const double dt = t - t0;
    if (dt <= 0.0) return 0.0;
    const double z = (std::log(dt) - mu) / sigma;
    return kInvSqrt2Pi / (sigma * dt) * std::exp(-0.5 * z * z);
}

double lognormal_cdf(double t, double t0, double mu, double sigma) {
    const double dt = t - t0;
    if (dt <= 0.0) return 0.0;
    return 0.5 * std::erfc(-(std::log(dt) - mu) / (sigma * std::numbers::sqrt2));
}

double stroke_angle(const LognormalStroke& s, double t) {
    return s.theta_s + (s.theta_e - s.theta_s) * lognormal_cdf(t, s.t0, s.mu, s.sigma);
}

Vec2 stroke_displacement(const LognormalStroke& s, double t) {
    const double c = lognormal_cdf(t, s.t0, s.mu, s.sigma);
    if (c == 0.0) return {};
    const double sweep = s.theta_e - s.theta_s;
    // sin(phi) - sin(theta_s), cos(theta_s) - cos(phi) in product form.
    const double mid = s.theta_s + 0.5 * sweep * c;
    return s.D * chord_scale(sweep, c) * unit_vector(mid);
}

std::vector<Vec2> synthesize_velocity(const SigmaLognormalModel& model, const TimeGrid& grid) {
    std::vector<Vec2> v(grid.size);
    for (const auto& s : model.strokes) {
        const double end = s.support_end();
        for (std::size_t i = 0; i < grid.size; ++i) {
            const double t = grid.time(i);
            if (t <= s.t0) continue;
            if (t > end) break;
            const double speed = s.D * lognormal_pdf(t, s.t0, s.mu, s.sigma);
            v[i] += speed * unit_vector(stroke_angle(s, t));
        }
    }
    return v;
}

ReconstructedMovement synthesize_trajectory(const SigmaLognormalModel& model, const TimeGrid& grid,
                                            const SegmentationConfig& seg) {
    ReconstructedMovement out;
    out.trajectory.t0 = grid.t0;
    out.trajectory.dt = grid.dt;
    out.trajectory.points.assign(grid.size, model.origin);
    for (const auto& s : model.strokes) {
        for (std::size_t i = 0; i < grid.size; ++i) {
            out.trajectory.points[i] += stroke_displacement(s, grid.time(i));
        }
    }

    const auto v = synthesize_velocity(model, grid);
    out.speed.t0 = grid.t0;
    out.speed.dt = grid.dt;
    out.speed.values.reserve(v.size());
    for (const auto& w : v) out.speed.values.push_back(norm(w));

    if (grid.size > 0) {
        const auto minima = find_velocity_minima(out.speed, seg);
        out.reconstructed_salient_points = locate_salient_points(minima, out.trajectory);
    }
    return out;
}

Vec2 target_point(const LognormalStroke& s, Vec2 prev_tp) {
    const double sweep = s.theta_e - s.theta_s;
    return prev_tp + s.D * chord_scale(sweep, 1.0) * unit_vector(s.theta_s + 0.5 * sweep);
}

}  // namespace idelog
