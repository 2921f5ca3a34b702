#include "idelog/metrics.hpp"

#include <vector>

namespace idelog {

namespace {

void require_same_grid(std::size_t n_obs, std::size_t n_rec, double dt_obs, double dt_rec, const char* what) {
    if (n_obs != n_rec) {
        throw InputError(std::string(what) + ": observed and reconstructed lengths differ (" + std::to_string(n_obs) +
                         " vs " + std::to_string(n_rec) + ")");
    }
    if (std::abs(dt_obs - dt_rec) > 1e-9 * std::abs(dt_obs)) {
        throw InputError(std::string(what) + ": observed and reconstructed grids differ");
    }
}

double ratio_db(double signal, double residual) {
    if (residual <= 0.0 || signal / residual >= 1e12) return kSnrCapDb;
    return 10.0 * std::log10(signal / residual);
}

}  // namespace

double trapezoid(std::span<const double> y, double dt) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * dt;
}

double snr_v(const SpeedProfile& observed, const SpeedProfile& reconstructed) {
    require_same_grid(observed.size(), reconstructed.size(), observed.dt, reconstructed.dt, "snr_v");
    const std::size_t n = observed.size();
    std::vector<double> sig(n), res(n);
    for (std::size_t i = 0; i < n; ++i) {
        sig[i] = observed.values[i] * observed.values[i];
        const double d = observed.values[i] - reconstructed.values[i];
        res[i] = d * d;
    }
    const double signal = trapezoid(sig, observed.dt);
    if (!(signal > 0.0)) throw InputError("snr_v: observed speed profile has zero energy");
    return ratio_db(signal, trapezoid(res, observed.dt));
}

double snr_t(const Trajectory& observed, const Trajectory& reconstructed) {
    require_same_grid(observed.size(), reconstructed.size(), observed.dt, reconstructed.dt, "snr_t");
    const std::size_t n = observed.size();
    if (n < 2) throw InputError("snr_t: trajectory too short");
    std::vector<double> xs(n), ys(n), ones(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = observed.points[i].x;
        ys[i] = observed.points[i].y;
    }
    const double span = trapezoid(ones, observed.dt);
    const Vec2 mean{trapezoid(xs, observed.dt) / span, trapezoid(ys, observed.dt) / span};

    std::vector<double> sig(n), res(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 c = observed.points[i] - mean;
        const Vec2 r = observed.points[i] - reconstructed.points[i];
        sig[i] = dot(c, c);
        res[i] = dot(r, r);
    }
    const double signal = trapezoid(sig, observed.dt);
    if (!(signal > 0.0)) throw InputError("snr_t: observed trajectory has zero variance");
    return ratio_db(signal, trapezoid(res, observed.dt));
}

ReconstructionReport make_report(const SigmaLognormalModel& model, const Trajectory& observed,
                                 const SpeedProfile& observed_speed, const ReconstructedMovement& reconstructed,
                                 bool preprocessed) {
    ReconstructionReport r;
    r.snr_t = snr_t(observed, reconstructed.trajectory);
    r.snr_v = snr_v(observed_speed, reconstructed.speed);
    r.snr_t_capped = r.snr_t >= kSnrCapDb;
    r.snr_v_capped = r.snr_v >= kSnrCapDb;
    r.nb_log = model.strokes.size();
    if (r.nb_log > 0) {
        r.snr_t_per_log = r.snr_t / static_cast<double>(r.nb_log);
        r.snr_v_per_log = r.snr_v / static_cast<double>(r.nb_log);
    }
    r.compared_against_preprocessed = preprocessed;
    return r;
}

ReconstructionReport make_report(const SigmaLognormalModel& model, const Trajectory& observed,
                                 const ReconstructedMovement& reconstructed, bool preprocessed) {
    return make_report(model, observed, speed_profile(observed), reconstructed, preprocessed);
}

}  // namespace idelog
