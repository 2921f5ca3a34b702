#pragma once

// Ingest-side signal conditioning: uniform resampling, zero-phase smoothing,
// speed profiles and the 8-connected discrete path used for arc-length
// geometry on the observed trajectory.

#include "idelog/common.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace idelog {

/// One tablet sample.
struct PenSample {
    double t = 0.0;  ///< seconds
    double x = 0.0;  ///< device units
    double y = 0.0;  ///< device units
    double p = 0.0;  ///< pressure
    bool pen_down = true;
};

/// Time-stamped pen samples as captured.
struct RawSignature {
    std::vector<PenSample> samples;
    double sampling_rate_hint = 0.0;  ///< Hz, 0 when unknown
    std::string source_id;

    /// Throws InputError unless there are at least 2 samples with strictly
    /// increasing, finite timestamps and finite coordinates.
    void validate() const;
};

/// Uniform time grid t_i = t0 + i * dt, i in [0, size).
struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t size = 0;

    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double end_time() const { return size == 0 ? t0 : time(size - 1); }
    double rate() const { return 1.0 / dt; }
    /// Nearest grid index of time t, clamped to the grid.
    std::size_t index_of(double t) const;
};

/// Pen positions on a uniform time grid.
struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<Vec2> points;
    /// Pen state per point; empty when unknown (treated as all down).
    std::vector<bool> pen_down;

    std::size_t size() const { return points.size(); }
    TimeGrid grid() const { return {t0, dt, points.size()}; }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
};

/// Speed magnitude on the same grid as its source trajectory.
struct SpeedProfile {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    TimeGrid grid() const { return {t0, dt, values.size()}; }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
};

struct GridCell {
    long x = 0;
    long y = 0;
    friend constexpr bool operator==(GridCell, GridCell) = default;
};

/// Trajectory rasterized onto an 8-connected integer grid.
struct DiscretePath {
    std::vector<GridCell> cells;
    /// Arc length from the first cell, in grid units (steps cost 1 or sqrt 2).
    std::vector<double> cumulative_length;
    /// Cell index of each original trajectory sample.
    std::vector<std::size_t> sample_anchor;
    /// Grid cells per device unit.
    double scale = 1.0;

    std::size_t size() const { return cells.size(); }
    double total_length() const { return cumulative_length.empty() ? 0.0 : cumulative_length.back(); }
    /// Cell centre in device units.
    Vec2 position(std::size_t cell) const;
};

enum class Interpolation { cubic_spline, linear };

struct Resampled {
    Trajectory trajectory;
    /// linear when the input had fewer than 4 samples.
    Interpolation method = Interpolation::cubic_spline;
};

/// Interpolates the signature onto a uniform grid at target_rate spanning
/// [first, last] timestamp with a natural cubic spline per coordinate.
/// Pen state is carried over from the latest sample at or before each grid time.
Resampled resample(const RawSignature& raw, double target_rate);

enum class FilterFamily { chebyshev1, butterworth };

struct SmoothConfig {
    bool enabled = false;
    FilterFamily family = FilterFamily::chebyshev1;
    int order = 2;
    double cutoff_hz = 10.0;
    /// Passband ripple, only used by chebyshev1.
    double ripple_db = 0.5;
};

/// Second-order IIR section, direct form II transposed, a0 == 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Low-pass cascade with unit DC gain. Throws InputError when the cutoff is
/// not strictly inside (0, Nyquist) or the order is below 1.
std::vector<Biquad> design_lowpass(const SmoothConfig& cfg, double sample_rate);

/// Zero-phase forward-backward filtering with odd reflection padding and
/// steady-state initial conditions.
std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> signal);

/// Applies the configured low-pass per coordinate; identity when disabled.
Trajectory smooth(const Trajectory& traj, const SmoothConfig& cfg);

/// Planar velocity by central differences (one-sided at the ends).
std::vector<Vec2> velocity(const Trajectory& traj);

/// |velocity|; requires at least 3 points.
SpeedProfile speed_profile(const Trajectory& traj);

/// Rounds samples to the integer grid (after multiplying by scale), links them
/// with Bresenham segments and removes repeated cells.
DiscretePath eight_connected(const Trajectory& traj, double scale = 1.0);

/// Cell between a and b whose arc length from a is closest to half of the
/// a-to-b arc length; ties go to the lower index.
std::size_t path_midpoint_index(const DiscretePath& path, std::size_t a, std::size_t b);

/// Device-unit position of path_midpoint_index.
Vec2 path_midpoint(const DiscretePath& path, std::size_t a, std::size_t b);

/// Natural cubic spline through (x_i, y_i) with strictly increasing x.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace idelog
