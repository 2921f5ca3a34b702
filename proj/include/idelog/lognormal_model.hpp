#pragma once

// Forward Sigma-Lognormal model. Each stroke contributes a lognormal speed
// profile travelling along a circular arc; the movement is the vector sum of
// all strokes. This module is the reconstruction engine of both extractors
// and the ground truth used throughout the tests.

#include "idelog/segmentation.hpp"
#include "idelog/signal_core.hpp"

#include <vector>

namespace idelog {

/// Below this sweep |theta_e - theta_s| a stroke is treated as a straight line.
inline constexpr double kStraightAngleEps = 1e-6;

/// Number of sigmas after which a lognormal is treated as finished.
inline constexpr double kSupportSigmas = 5.0;

struct LognormalStroke {
    double D = 0.0;        ///< arc length, device units
    double t0 = 0.0;       ///< command time, seconds
    double mu = 0.0;       ///< log-time delay
    double sigma = 0.1;    ///< log-response time
    double theta_s = 0.0;  ///< start angle, radians
    double theta_e = 0.0;  ///< end angle, radians

    bool is_straight() const { return std::abs(theta_e - theta_s) < kStraightAngleEps; }
    /// t0 + exp(mu + 5 sigma); the speed is taken as zero afterwards.
    double support_end() const { return t0 + std::exp(mu + kSupportSigmas * sigma); }
    /// Throws InputError on sigma <= 0, D <= 0 or non-finite fields.
    void validate() const;
};

struct SigmaLognormalModel {
    Vec2 origin;
    std::vector<LognormalStroke> strokes;
    double duration = 0.0;  ///< T, seconds

    /// True when some stroke is still active at the end of the signal.
    bool truncated_at_duration() const;
    void validate() const;
};

struct ReconstructedMovement {
    Trajectory trajectory;
    /// Magnitude of the analytic derivative of the trajectory.
    SpeedProfile speed;
    SalientPointSet reconstructed_salient_points;
};

/// Unit-area lognormal density; 0 for t <= t0.
double lognormal_pdf(double t, double t0, double mu, double sigma);

/// Cumulative fraction of the lognormal reached at t; 0 for t <= t0.
double lognormal_cdf(double t, double t0, double mu, double sigma);

/// Angular position: sweeps from theta_s to theta_e with lognormal timing.
double stroke_angle(const LognormalStroke& s, double t);

/// Displacement of one stroke from its start at time t along its arc.
Vec2 stroke_displacement(const LognormalStroke& s, double t);

/// Planar velocity of the whole model on a grid.
std::vector<Vec2> synthesize_velocity(const SigmaLognormalModel& model, const TimeGrid& grid);

/// Trajectory, speed and salient points (speed minima) of the model on a grid.
ReconstructedMovement synthesize_trajectory(const SigmaLognormalModel& model, const TimeGrid& grid,
                                            const SegmentationConfig& seg = {});

/// Virtual target point reached by a stroke starting from prev_tp, using the
/// completed sweep (theta_e) rather than the angle at the signal end.
Vec2 target_point(const LognormalStroke& s, Vec2 prev_tp);

}  // namespace idelog
