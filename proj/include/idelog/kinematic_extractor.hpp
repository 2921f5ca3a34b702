#pragma once

// Per-lobe kinematic fit: t0 comes from a fixed transmission delay before the
// lobe start, then (mu, sigma) are fitted to the unit-area lobe by
// Levenberg-Marquardt with analytic derivatives.

#include "idelog/segmentation.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace idelog {

struct KinematicConfig {
    double delay = 0.5;  ///< seconds between t0 and the lobe start
    double mu_min = -4.0;
    double mu_max = 2.0;
    double sigma_min = 0.01;
    double sigma_max = 1.5;
    int max_iterations = 200;
    double gradient_tolerance = 1e-10;
    double step_tolerance = 1e-12;
};

struct KinematicFit {
    std::size_t stroke_index = 0;
    double t0 = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double residual = 0.0;  ///< sum of dt * (Lambda - v_n)^2 over the lobe window
    int iterations_used = 0;
    bool converged = false;
};

/// Lobe sampled on a uniform grid starting at t_start.
struct NormalizedLobe {
    std::size_t stroke_index = 0;
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    double time(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
};

struct LognormalInit {
    double mu = 0.0;
    double sigma = 0.2;
};

double estimate_t0(double t_min_prev, double delay = 0.5);

/// Scales the lobe to unit trapezoidal area. Throws NumericError on a
/// zero-area lobe.
NormalizedLobe normalize_lobe(const VelocityLobe& lobe);

/// mu0 = ln(t_peak - t0), sigma0 = 0.2.
LognormalInit peak_init(const NormalizedLobe& lobe, double t0);

/// Mean and standard deviation of ln(t - t0) under the lobe.
LognormalInit moment_init(const NormalizedLobe& lobe, double t0);

/// Value of the fitting objective for given parameters.
double fit_objective(const NormalizedLobe& lobe, double t0, double mu, double sigma);

/// Minimises sum dt * (Lambda(t; t0, mu, sigma) - v_n(t))^2 over the window.
/// On non-convergence returns the best parameters found with converged = false.
KinematicFit fit_mu_sigma(const NormalizedLobe& lobe, double t0, LognormalInit init,
                          const KinematicConfig& cfg = {});

/// Fits from both the peak and the moment initialisation and keeps the lower residual.
KinematicFit fit_lobe(const VelocityLobe& lobe, double t_min_prev, const KinematicConfig& cfg = {});

}  // namespace idelog
