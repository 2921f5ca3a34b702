#pragma once

// Action-plan extraction from the observed trajectory: virtual target points
// placed on triangle medians, arc angles from the circle through each
// stroke's endpoints and path midpoint, and the arc length of each stroke.

#include "idelog/segmentation.hpp"
#include "idelog/signal_core.hpp"

#include <optional>
#include <vector>

namespace idelog {

struct StrokeAngles {
    double theta_s = 0.0;
    double theta_e = 0.0;

    double sweep() const { return theta_e - theta_s; }
};

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

/// Spatial half of the Sigma-Lognormal parameters.
struct ActionPlan {
    std::vector<Vec2> target_points;  ///< tp_0 .. tp_N
    std::vector<StrokeAngles> angles; ///< per stroke j = 1..N (index j - 1)
    std::vector<double> amplitudes;   ///< D_j, same indexing as angles
    /// Arc-length midpoints of the observed strokes; used to re-derive the
    /// angles whenever target points move.
    std::vector<Vec2> midpoints;

    std::size_t stroke_count() const { return angles.size(); }
};

/// Circumscribed circle, or nullopt for (near-)collinear points.
std::optional<Circle> circle_through(Vec2 a, Vec2 b, Vec2 c);

/// Target point on the median from sp toward the midpoint of sp_prev and
/// sp_next, at distance htp * (1 + cos(vertex_angle / 2)) / 2 from sp.
Vec2 initial_target_point(Vec2 sp_prev, Vec2 sp, Vec2 sp_next);

/// Tangent directions at start and end of the circular arc start -> mid -> end,
/// oriented along the direction of travel. Collinear input gives a straight
/// stroke along the chord.
StrokeAngles estimate_angles(Vec2 start, Vec2 mid, Vec2 end);

/// Arc length of the stroke joining tp_prev to tp with the given tangents.
double stroke_amplitude(Vec2 tp_prev, Vec2 tp, double theta_s, double theta_e);

/// Initial plan: tp_0 = sp_0, tp_N = sp_N, interior points by median
/// placement, angles from the observed stroke circles, amplitudes from the
/// target points. salient must carry path cells from the same path.
ActionPlan build_action_plan(const SalientPointSet& salient, const DiscretePath& path);

/// Recomputes angles and amplitude of stroke j (1-based) from the current
/// target points and the stored observed midpoint.
void update_stroke_geometry(ActionPlan& plan, std::size_t j);

}  // namespace idelog
