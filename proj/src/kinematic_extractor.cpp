#include "idelog/kinematic_extractor.hpp"

#include "idelog/lognormal_model.hpp"

#include <algorithm>
#include <array>

namespace idelog {

double estimate_t0(double t_min_prev, double delay) { return t_min_prev - delay; }

NormalizedLobe normalize_lobe(const VelocityLobe& lobe) {
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < lobe.values.size(); ++k) {
        area += 0.5 * (lobe.values[k] + lobe.values[k + 1]) * lobe.dt;
    }
    if (!(area > 0.0) || !std::isfinite(area)) {
        throw NumericError("stroke " + std::to_string(lobe.stroke_index) + " has a zero-area velocity lobe");
    }
    NormalizedLobe out;
    out.stroke_index = lobe.stroke_index;
    out.t_start = lobe.t_start;
    out.dt = lobe.dt;
    out.values.reserve(lobe.values.size());
    for (double v : lobe.values) out.values.push_back(v / area);
    return out;
}

LognormalInit peak_init(const NormalizedLobe& lobe, double t0) {
    const auto it = std::max_element(lobe.values.begin(), lobe.values.end());
    const double t_peak = lobe.time(static_cast<std::size_t>(it - lobe.values.begin()));
    return {std::log(std::max(t_peak - t0, 1e-9)), 0.2};
}

LognormalInit moment_init(const NormalizedLobe& lobe, double t0) {
    double w_sum = 0.0, m1 = 0.0;
    for (std::size_t k = 0; k < lobe.values.size(); ++k) {
        const double dt = lobe.time(k) - t0;
        if (dt <= 0.0) continue;
        w_sum += lobe.values[k];
        m1 += lobe.values[k] * std::log(dt);
    }
    if (!(w_sum > 0.0)) return peak_init(lobe, t0);
    const double mean = m1 / w_sum;
    double var = 0.0;
    for (std::size_t k = 0; k < lobe.values.size(); ++k) {
        const double dt = lobe.time(k) - t0;
        if (dt <= 0.0) continue;
        const double d = std::log(dt) - mean;
        var += lobe.values[k] * d * d;
    }
    return {mean, std::max(std::sqrt(var / w_sum), 0.01)};
}

double fit_objective(const NormalizedLobe& lobe, double t0, double mu, double sigma) {
    double f = 0.0;
    for (std::size_t k = 0; k < lobe.values.size(); ++k) {
        const double r = lognormal_pdf(lobe.time(k), t0, mu, sigma) - lobe.values[k];
        f += lobe.dt * r * r;
    }
    return f;
}

KinematicFit fit_mu_sigma(const NormalizedLobe& lobe, double t0, LognormalInit init, const KinematicConfig& cfg) {
    if (lobe.values.empty()) throw InputError("fit_mu_sigma: empty lobe");
    if (t0 > lobe.t_start) throw InputError("fit_mu_sigma: t0 must not follow the lobe start");

    auto clamp_mu = [&](double m) { return std::clamp(m, cfg.mu_min, cfg.mu_max); };
    auto clamp_sigma = [&](double s) { return std::clamp(s, cfg.sigma_min, cfg.sigma_max); };

    KinematicFit fit;
    fit.stroke_index = lobe.stroke_index;
    fit.t0 = t0;
    double mu = clamp_mu(init.mu);
    double sigma = clamp_sigma(init.sigma);
    double f = fit_objective(lobe, t0, mu, sigma);
    double lambda = 1e-3;

    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        // Normal equations of the weighted residuals.
        std::array<double, 3> a{};  // JtJ: [mm, ms, ss]
        std::array<double, 2> g{};
        for (std::size_t k = 0; k < lobe.values.size(); ++k) {
            const double t = lobe.time(k);
            const double lam = lognormal_pdf(t, t0, mu, sigma);
            if (lam == 0.0 && lobe.values[k] == 0.0) continue;
            const double r = lam - lobe.values[k];
            double jm = 0.0, js = 0.0;
            if (lam > 0.0) {
                const double z = (std::log(t - t0) - mu) / sigma;
                jm = lam * z / sigma;
                js = lam * (z * z - 1.0) / sigma;
            }
            a[0] += lobe.dt * jm * jm;
            a[1] += lobe.dt * jm * js;
            a[2] += lobe.dt * js * js;
            g[0] += lobe.dt * jm * r;
            g[1] += lobe.dt * js * r;
        }
        if (std::hypot(g[0], g[1]) < cfg.gradient_tolerance) {
            fit.converged = true;
            break;
        }

        bool accepted = false;
        while (!accepted && lambda < 1e16) {
            const double d0 = a[0] + lambda * std::max(a[0], 1e-300);
            const double d2 = a[2] + lambda * std::max(a[2], 1e-300);
            const double det = d0 * d2 - a[1] * a[1];
            if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
                lambda *= 10.0;
                continue;
            }
            const double step_mu = -(d2 * g[0] - a[1] * g[1]) / det;
            const double step_sigma = -(d0 * g[1] - a[1] * g[0]) / det;
            const double mu_new = clamp_mu(mu + step_mu);
            const double sigma_new = clamp_sigma(sigma + step_sigma);
            const double f_new = fit_objective(lobe, t0, mu_new, sigma_new);
            if (std::isfinite(f_new) && f_new < f) {
                const double moved = std::hypot(mu_new - mu, sigma_new - sigma);
                mu = mu_new;
                sigma = sigma_new;
                f = f_new;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (moved < cfg.step_tolerance * (1.0 + std::abs(mu) + sigma)) fit.converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            // No descent direction left inside the bounds.
            fit.converged = true;
            break;
        }
        if (fit.converged) {
            ++iter;
            break;
        }
    }

    fit.mu = mu;
    fit.sigma = sigma;
    fit.residual = f;
    fit.iterations_used = iter;
    return fit;
}

KinematicFit fit_lobe(const VelocityLobe& lobe, double t_min_prev, const KinematicConfig& cfg) {
    const auto normalized = normalize_lobe(lobe);
    const double t0 = estimate_t0(t_min_prev, cfg.delay);
    const auto a = fit_mu_sigma(normalized, t0, peak_init(normalized, t0), cfg);
    const auto b = fit_mu_sigma(normalized, t0, moment_init(normalized, t0), cfg);
    return (b.residual < a.residual) ? b : a;
}

}  // namespace idelog
