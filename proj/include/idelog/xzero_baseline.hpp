#pragma once

// Baseline extractor in the Robust XZERO style: strokes are peeled off the
// speed profile one at a time, each one estimated in closed form from three
// characteristic points (the two inflections and the peak of its lobe), and
// the angles come from the observed direction of motion at those points.

#include "idelog/lognormal_model.hpp"
#include "idelog/signal_core.hpp"
#include "idelog/spatial_extractor.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace idelog {

/// Times t1..t5 (index 0..4) of a lobe and the speeds at t2, t3, t4.
/// t1 and t5 are the lobe bounds; only t2..t4 enter the estimation.
struct CharacteristicPoints {
    std::array<double, 5> times{};
    std::array<double, 3> speeds{};  ///< v(t2), v(t3), v(t4)

    double time(int i) const { return times[static_cast<std::size_t>(i - 1)]; }
    double speed(int i) const { return speeds[static_cast<std::size_t>(i - 2)]; }
    /// Throws InputError unless t2 < t3 < t4, speeds positive and v(t3) is the largest.
    void validate() const;
};

struct XZeroConfig {
    double snr_target = 25.0;               ///< dB
    std::optional<std::size_t> max_strokes; ///< default: twice the velocity-minima count
    double min_stroke_area = 0.01;          ///< fraction of the profile area
    double min_peak = 0.02;                 ///< fraction of the global peak
    double mu_min = -4.0;
    double mu_max = 2.0;
    double sigma_min = 0.01;
    double sigma_max = 1.5;

    void validate() const;
};

struct StrokeEstimate {
    double t0 = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double D = 0.0;
    double fit_error = 0.0;  ///< squared error against v(t2), v(t3), v(t4)
    int alpha = 0;
    int beta = 0;
};

/// a_i for i in {2, 3, 4}; also 1 and 5 as the +-3 sigma lobe bounds.
double a_coeff(double sigma, int i);

/// Closed-form estimate from the pair (alpha, beta), alpha < beta in {2,3,4}.
/// nullopt when the pair gives sigma^2 <= 0 or non-finite values.
std::optional<StrokeEstimate> estimate_from_pair(const CharacteristicPoints& p, int alpha, int beta);

/// Best of the three pairs by squared error at the characteristic speeds.
/// Throws NumericError("no valid lognormal fit") when every pair fails.
StrokeEstimate estimate_stroke_params(const CharacteristicPoints& p);

/// d(t_i), the arc length covered by t_i, for i = 1..5.
double covered_distance(const LognormalStroke& s, int i);

/// Start and end angles from the direction of motion phi(t2), phi(t3),
/// phi(t4) (already unwrapped).
StrokeAngles xzero_angles(const LognormalStroke& s, double phi2, double phi3, double phi4);

/// Characteristic points of the lobe around sample k3 of a profile, or
/// nullopt when the lobe is too short to hold two inflections.
std::optional<CharacteristicPoints> detect_characteristic_points(std::span<const double> v, double t_start, double dt,
                                                                 std::size_t k3);

struct XZeroResult {
    SigmaLognormalModel model;
    std::vector<double> snr_history;  ///< SNR_v of the scalar sum after each accepted stroke
    std::size_t rejected = 0;         ///< candidates discarded by the thresholds
};

/// Iterative extraction. traj supplies the direction of motion and the origin;
/// v must be on the same grid.
XZeroResult extract_all(const SpeedProfile& v, const Trajectory& traj, const XZeroConfig& cfg = {});

}  // namespace idelog
