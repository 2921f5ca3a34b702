#pragma once

// Reconstruction quality: trajectory and velocity signal-to-noise ratios and
// their per-lognormal ratios.

#include "idelog/lognormal_model.hpp"
#include "idelog/signal_core.hpp"

#include <cstddef>
#include <optional>
#include <span>

namespace idelog {

/// Value reported when the residual energy is zero.
inline constexpr double kSnrCapDb = 120.0;

struct ReconstructionReport {
    double snr_t = 0.0;  ///< dB
    double snr_v = 0.0;  ///< dB
    std::size_t nb_log = 0;
    /// Empty when nb_log == 0.
    std::optional<double> snr_t_per_log;
    std::optional<double> snr_v_per_log;
    bool compared_against_preprocessed = false;
    bool snr_t_capped = false;
    bool snr_v_capped = false;
};

/// Trapezoidal integral of uniformly spaced samples.
double trapezoid(std::span<const double> y, double dt);

/// 10 log10(signal energy / residual energy), capped at kSnrCapDb.
/// Throws InputError on grid mismatch or zero observed energy.
double snr_v(const SpeedProfile& observed, const SpeedProfile& reconstructed);

/// Observed coordinates centred on their own (time-weighted) means against the
/// observed-minus-reconstructed residual. Throws InputError on grid mismatch or
/// a motionless observed trajectory.
double snr_t(const Trajectory& observed, const Trajectory& reconstructed);

/// Both SNRs of a reconstruction with the observed speed taken from the
/// observed trajectory by central differences.
ReconstructionReport make_report(const SigmaLognormalModel& model, const Trajectory& observed,
                                 const ReconstructedMovement& reconstructed, bool preprocessed);

ReconstructionReport make_report(const SigmaLognormalModel& model, const Trajectory& observed,
                                 const SpeedProfile& observed_speed, const ReconstructedMovement& reconstructed,
                                 bool preprocessed);

}  // namespace idelog
