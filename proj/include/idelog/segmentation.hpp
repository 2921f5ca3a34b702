#pragma once

// Stroke segmentation: velocity minima split the speed profile into lobes,
// one per stroke, and mark the salient points on the trajectory.

#include "idelog/signal_core.hpp"

#include <cstddef>
#include <vector>

namespace idelog {

struct SegmentationConfig {
    /// When false every strict local minimum (plateaus: left edge) is kept.
    bool filter_enabled = false;
    /// Minimum prominence of an interior minimum, fraction of the global peak.
    double min_prominence = 0.01;
    /// Minimum spacing of consecutive minima, seconds.
    double min_lobe_duration = 0.02;
};

/// Velocity minima, endpoints included: times[0] is the profile start and
/// times.back() its end.
struct VelocityMinima {
    std::vector<double> times;
    std::vector<std::size_t> indices;

    std::size_t stroke_count() const { return times.empty() ? 0 : times.size() - 1; }
};

/// Speed samples of one stroke on [t_start, t_end] (both boundary samples
/// included). For every lobe but the first the start sample also belongs to
/// the previous lobe; shares_start marks that.
struct VelocityLobe {
    std::size_t stroke_index = 0;  ///< 1-based, as j in sp_{j-1} .. sp_j
    double t_start = 0.0;
    double t_end = 0.0;
    double dt = 0.0;
    std::size_t begin = 0;         ///< grid index of values[0]
    std::vector<double> values;
    bool shares_start = false;

    double time(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
    std::size_t end() const { return begin + values.size() - 1; }
};

/// Observed (or reconstructed) salient points sp_0 .. sp_N.
struct SalientPointSet {
    std::vector<double> times;
    std::vector<Vec2> points;
    std::vector<std::size_t> indices;     ///< trajectory sample index
    std::vector<std::size_t> path_cells;  ///< 8-connected cell index, empty if no path

    std::size_t size() const { return times.size(); }
    std::size_t stroke_count() const { return times.empty() ? 0 : times.size() - 1; }
};

/// Local minima of the speed profile. Endpoints are always returned; an
/// all-zero profile yields only the endpoints.
VelocityMinima find_velocity_minima(const SpeedProfile& v, const SegmentationConfig& cfg = {});

/// Splits the profile into lobes between consecutive minima.
std::vector<VelocityLobe> extract_lobes(const SpeedProfile& v, const VelocityMinima& minima);

/// sp_j is the trajectory sample nearest to t_min_j; sp_0 / sp_N are the first
/// and last samples. path may be null, in which case path_cells stays empty.
SalientPointSet locate_salient_points(const VelocityMinima& minima, const Trajectory& traj,
                                      const DiscretePath* path = nullptr);

}  // namespace idelog
