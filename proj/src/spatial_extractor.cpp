#include "idelog/spatial_extractor.hpp"

#include "idelog/lognormal_model.hpp"

#include <algorithm>

namespace idelog {

namespace {

// Relative collinearity threshold for the circle construction.
constexpr double kCollinearEps = 1e-12;
// |sin(sweep)| below which the normal-line intersection is ill-conditioned.
constexpr double kParallelEps = 1e-6;
constexpr double kMinAmplitude = 1e-9;

double positive_mod(double a, double m) {
    double r = std::fmod(a, m);
    if (r < 0.0) r += m;
    return r;
}

}  // namespace

std::optional<Circle> circle_through(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a;
    const Vec2 ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double scale = norm(ab) * norm(ac);
    if (!(std::abs(d) > kCollinearEps * scale) || scale == 0.0) return std::nullopt;
    const double ab2 = dot(ab, ab);
    const double ac2 = dot(ac, ac);
    const Vec2 u{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
    return Circle{a + u, norm(u)};
}

Vec2 initial_target_point(Vec2 sp_prev, Vec2 sp, Vec2 sp_next) {
    if (sp_prev == sp_next || sp_prev == sp || sp_next == sp) return sp;
    const Vec2 m = 0.5 * (sp_prev + sp_next);
    const Vec2 median = m - sp;
    const double htp = norm(median);
    if (htp == 0.0) return sp;
    const Vec2 u = sp_prev - sp;
    const Vec2 w = sp_next - sp;
    const double vertex = std::atan2(std::abs(cross(u, w)), dot(u, w));
    const double ltp = htp * (1.0 + std::cos(0.5 * vertex)) / 2.0;
    return sp + (ltp / htp) * median;
}

StrokeAngles estimate_angles(Vec2 start, Vec2 mid, Vec2 end) {
    const Vec2 chord = end - start;
    if (chord == Vec2{}) {
        // Closed loop: the circle with diameter start-mid, counterclockwise.
        const Vec2 to_mid = mid - start;
        if (to_mid == Vec2{}) return {0.0, 0.0};
        const double heading = std::atan2(to_mid.y, to_mid.x) - 0.5 * kPi;
        return {heading, heading + kTwoPi};
    }
    const auto circle = circle_through(start, mid, end);
    if (!circle) {
        const double heading = std::atan2(chord.y, chord.x);
        return {heading, heading};
    }
    const bool ccw = cross(mid - start, end - mid) > 0.0;
    const Vec2 r1 = start - circle->center;
    const Vec2 r3 = end - circle->center;
    const Vec2 tangent = ccw ? Vec2{-r1.y, r1.x} : Vec2{r1.y, -r1.x};
    const double theta_s = std::atan2(tangent.y, tangent.x);
    const double a1 = std::atan2(r1.y, r1.x);
    const double a3 = std::atan2(r3.y, r3.x);
    const double sweep = ccw ? positive_mod(a3 - a1, kTwoPi) : -positive_mod(a1 - a3, kTwoPi);
    return {theta_s, theta_s + sweep};
}

double stroke_amplitude(Vec2 tp_prev, Vec2 tp, double theta_s, double theta_e) {
    const double sweep = theta_e - theta_s;
    const double chord = distance(tp_prev, tp);
    if (std::abs(sweep) < kStraightAngleEps) return std::max(chord, kMinAmplitude);

    const Vec2 us = unit_vector(theta_s);
    const Vec2 ue = unit_vector(theta_e);
    const double det = cross(us, ue);
    double radius;
    if (std::abs(det) > kParallelEps) {
        // Normals to the tangents, in point-normal form: (c - tp_prev).us = 0, (c - tp).ue = 0.
        const double r0 = dot(tp_prev, us);
        const double r1 = dot(tp, ue);
        const Vec2 center{(r0 * ue.y - r1 * us.y) / det, (us.x * r1 - ue.x * r0) / det};
        radius = distance(center, tp_prev);
    } else {
        const double half = std::abs(std::sin(0.5 * sweep));
        if (half < kParallelEps) return std::max(chord, kMinAmplitude);
        radius = chord / (2.0 * half);
    }
    return std::max(radius * std::abs(sweep), kMinAmplitude);
}

void update_stroke_geometry(ActionPlan& plan, std::size_t j) {
    if (j == 0 || j > plan.stroke_count()) throw InputError("update_stroke_geometry: stroke index out of range");
    const Vec2 a = plan.target_points[j - 1];
    const Vec2 b = plan.target_points[j];
    plan.angles[j - 1] = estimate_angles(a, plan.midpoints[j - 1], b);
    plan.amplitudes[j - 1] = stroke_amplitude(a, b, plan.angles[j - 1].theta_s, plan.angles[j - 1].theta_e);
}

ActionPlan build_action_plan(const SalientPointSet& salient, const DiscretePath& path) {
    const std::size_t count = salient.size();
    if (count < 2) throw InputError("build_action_plan: need at least two salient points");
    if (salient.path_cells.size() != count) throw InputError("build_action_plan: salient points lack path cells");
    const std::size_t n = count - 1;
    const auto& sp = salient.points;

    ActionPlan plan;
    plan.target_points.resize(count);
    plan.target_points.front() = sp.front();
    plan.target_points.back() = sp.back();
    for (std::size_t j = 1; j < n; ++j) plan.target_points[j] = initial_target_point(sp[j - 1], sp[j], sp[j + 1]);

    plan.angles.resize(n);
    plan.amplitudes.resize(n);
    plan.midpoints.resize(n);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t a = salient.path_cells[j - 1];
        const std::size_t b = salient.path_cells[j];
        plan.midpoints[j - 1] = path_midpoint(path, std::min(a, b), std::max(a, b));
        plan.angles[j - 1] = estimate_angles(sp[j - 1], plan.midpoints[j - 1], sp[j]);
        plan.amplitudes[j - 1] = stroke_amplitude(plan.target_points[j - 1], plan.target_points[j],
                                                  plan.angles[j - 1].theta_s, plan.angles[j - 1].theta_e);
    }
    return plan;
}

}  // namespace idelog
