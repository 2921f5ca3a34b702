#include "idelog/xzero_baseline.hpp"

#include "idelog/metrics.hpp"
#include "idelog/segmentation.hpp"

#include <algorithm>
#include <numbers>

namespace idelog {

void CharacteristicPoints::validate() const {
    if (!(time(2) < time(3) && time(3) < time(4))) throw InputError("characteristic points: need t2 < t3 < t4");
    for (double v : speeds) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError("characteristic points: speeds must be positive");
    }
    if (speed(3) < speed(2) || speed(3) < speed(4)) throw InputError("characteristic points: v(t3) must be the peak");
}

void XZeroConfig::validate() const {
    if (!(snr_target > 0.0)) throw InputError("xzero: snr_target must be positive");
    if (max_strokes && *max_strokes < 1) throw InputError("xzero: max_strokes must be >= 1");
    if (!(mu_min < mu_max) || !(0.0 < sigma_min && sigma_min < sigma_max)) {
        throw InputError("xzero: invalid mu/sigma ranges");
    }
}

double a_coeff(double sigma, int i) {
    const double s2 = sigma * sigma;
    const double root = sigma * std::sqrt(0.25 * s2 + 1.0);
    switch (i) {
    case 1: return 3.0 * sigma;
    case 2: return 1.5 * s2 + root;
    case 3: return s2;
    case 4: return 1.5 * s2 - root;
    case 5: return -3.0 * sigma;
    default: throw InputError("a_coeff: index must be in 1..5");
    }
}

std::optional<StrokeEstimate> estimate_from_pair(const CharacteristicPoints& p, int alpha, int beta) {
    if (!(alpha < beta) || alpha < 2 || beta > 4) throw InputError("estimate_from_pair: need 2 <= alpha < beta <= 4");

    double s2;
    if (alpha == 2 && beta == 4) {
        const double l = std::log(p.speed(2) / p.speed(4));
        s2 = -2.0 + 2.0 * std::sqrt(1.0 + l * l);
    } else {
        // (2,3) uses r_23, (3,4) uses r_43.
        const double l = alpha == 2 ? std::log(p.speed(2) / p.speed(3)) : std::log(p.speed(4) / p.speed(3));
        if (l == 0.0) return std::nullopt;
        s2 = -2.0 - 2.0 * l - 1.0 / (2.0 * l);
    }
    if (!(s2 > 0.0) || !std::isfinite(s2)) return std::nullopt;

    StrokeEstimate e;
    e.alpha = alpha;
    e.beta = beta;
    e.sigma = std::sqrt(s2);
    const double aa = a_coeff(e.sigma, alpha);
    const double ab = a_coeff(e.sigma, beta);
    const double ta = p.time(alpha);
    e.mu = std::log((ta - p.time(beta)) / (std::exp(-aa) - std::exp(-ab)));
    e.t0 = ta - std::exp(e.mu - aa);
    // Printed with the "- a" outside the exponential; this grouping is the one
    // that inverts the lognormal at t_alpha.
    e.D = p.speed(alpha) * e.sigma * std::sqrt(2.0 * std::numbers::pi) * std::exp(e.mu - aa + aa * aa / (2.0 * s2));
    if (!std::isfinite(e.mu) || !std::isfinite(e.t0) || !(e.D > 0.0) || !std::isfinite(e.D)) return std::nullopt;

    e.fit_error = 0.0;
    for (int i = 2; i <= 4; ++i) {
        const double r = e.D * lognormal_pdf(p.time(i), e.t0, e.mu, e.sigma) - p.speed(i);
        e.fit_error += r * r;
    }
    return e;
}

StrokeEstimate estimate_stroke_params(const CharacteristicPoints& p) {
    std::optional<StrokeEstimate> best;
    for (auto [a, b] : {std::pair{2, 3}, std::pair{2, 4}, std::pair{3, 4}}) {
        auto e = estimate_from_pair(p, a, b);
        if (e && (!best || e->fit_error < best->fit_error)) best = e;
    }
    if (!best) throw NumericError("no valid lognormal fit");
    return *best;
}

double covered_distance(const LognormalStroke& s, int i) {
    if (i == 1) return 0.0;
    if (i == 5) return s.D;
    const double a = a_coeff(s.sigma, i);
    return 0.5 * s.D * (1.0 + std::erf(-a / (s.sigma * std::numbers::sqrt2)));
}

StrokeAngles xzero_angles(const LognormalStroke& s, double phi2, double phi3, double phi4) {
    const double d2 = covered_distance(s, 2);
    const double d3 = covered_distance(s, 3);
    const double d4 = covered_distance(s, 4);
    if (!(d4 > d2)) return {phi3, phi3};
    const double rate = (phi4 - phi2) / (d4 - d2);
    // The end angle continues forward from phi(t3); a minus sign here would
    // send theta_e back past theta_s.
    return {phi3 - rate * (d3 - covered_distance(s, 1)), phi3 + rate * (covered_distance(s, 5) - d3)};
}

namespace {

double interpolate(std::span<const double> v, double t_start, double dt, double t) {
    const double x = std::clamp((t - t_start) / dt, 0.0, static_cast<double>(v.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(x), v.size() - 1);
    if (k + 1 >= v.size()) return v[k];
    const double f = x - static_cast<double>(k);
    return v[k] + f * (v[k + 1] - v[k]);
}

// Vertex offset in (-0.5, 0.5) of the parabola through three samples.
double parabolic_offset(double ym, double y0, double yp) {
    const double den = ym - 2.0 * y0 + yp;
    if (den == 0.0) return 0.0;
    return std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
}

std::pair<std::size_t, std::size_t> lobe_bounds(std::span<const double> v, std::size_t k3) {
    std::size_t k1 = k3, k5 = k3;
    while (k1 > 0 && v[k1 - 1] < v[k1]) --k1;
    while (k5 + 1 < v.size() && v[k5 + 1] < v[k5]) ++k5;
    return {k1, k5};
}

}  // namespace

std::optional<CharacteristicPoints> detect_characteristic_points(std::span<const double> v, double t_start, double dt,
                                                                 std::size_t k3) {
    if (k3 == 0 || k3 + 1 >= v.size()) return std::nullopt;
    const auto [k1, k5] = lobe_bounds(v, k3);
    if (k3 < k1 + 2 || k5 < k3 + 2) return std::nullopt;

    auto slope = [&](std::size_t k) { return (v[k + 1] - v[k - 1]) / (2.0 * dt); };
    std::size_t k2 = k1 + 1, k4 = k3 + 1;
    for (std::size_t k = k1 + 1; k < k3; ++k) {
        if (slope(k) > slope(k2)) k2 = k;
    }
    for (std::size_t k = k3 + 1; k < k5; ++k) {
        if (slope(k) < slope(k4)) k4 = k;
    }
    auto refine = [&](std::size_t k) {
        if (k < 2 || k + 2 >= v.size()) return static_cast<double>(k);
        return static_cast<double>(k) + parabolic_offset(slope(k - 1), slope(k), slope(k + 1));
    };

    CharacteristicPoints p;
    const double x3 = static_cast<double>(k3) + parabolic_offset(v[k3 - 1], v[k3], v[k3 + 1]);
    const double x2 = std::min(refine(k2), x3 - 0.5);
    const double x4 = std::max(refine(k4), x3 + 0.5);
    p.times = {t_start + static_cast<double>(k1) * dt, t_start + x2 * dt, t_start + x3 * dt, t_start + x4 * dt,
               t_start + static_cast<double>(k5) * dt};
    const double d3 = x3 - static_cast<double>(k3);
    p.speeds = {interpolate(v, t_start, dt, p.times[1]), v[k3] - 0.25 * (v[k3 - 1] - v[k3 + 1]) * d3,
                interpolate(v, t_start, dt, p.times[3])};
    return p;
}

namespace {

bool in_range(const StrokeEstimate& e, const XZeroConfig& cfg) {
    return e.mu >= cfg.mu_min && e.mu <= cfg.mu_max && e.sigma >= cfg.sigma_min && e.sigma <= cfg.sigma_max;
}

// Moves t2 and t4 to `factor` times their distance from t3, inside the lobe.
CharacteristicPoints repick(const CharacteristicPoints& p, double factor, std::span<const double> v, double t_start,
                            double dt) {
    CharacteristicPoints q = p;
    const double t3 = p.time(3);
    q.times[1] = std::max(t3 - factor * (t3 - p.time(2)), p.time(1));
    q.times[3] = std::min(t3 + factor * (p.time(4) - t3), p.time(5));
    q.speeds[0] = interpolate(v, t_start, dt, q.times[1]);
    q.speeds[2] = interpolate(v, t_start, dt, q.times[3]);
    return q;
}

std::optional<StrokeEstimate> try_estimate(const CharacteristicPoints& p) {
    if (!(p.time(2) < p.time(3) && p.time(3) < p.time(4))) return std::nullopt;
    if (!(p.speed(2) > 0.0 && p.speed(4) > 0.0)) return std::nullopt;
    try {
        return estimate_stroke_params(p);
    } catch (const NumericError&) {
        return std::nullopt;
    }
}

double scalar_snr(const std::vector<double>& obs, const std::vector<double>& rec, double dt) {
    std::vector<double> sig(obs.size()), res(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        sig[i] = obs[i] * obs[i];
        res[i] = (obs[i] - rec[i]) * (obs[i] - rec[i]);
    }
    const double r = trapezoid(res, dt);
    const double s = trapezoid(sig, dt);
    if (r <= 0.0 || s / r >= 1e12) return kSnrCapDb;
    return 10.0 * std::log10(s / r);
}

// Direction of motion at t, from linearly interpolated velocity components.
double direction_at(const std::vector<double>& vx, const std::vector<double>& vy, double t0, double dt, double t) {
    return std::atan2(interpolate(vy, t0, dt, t), interpolate(vx, t0, dt, t));
}

}  // namespace

XZeroResult extract_all(const SpeedProfile& v, const Trajectory& traj, const XZeroConfig& cfg) {
    cfg.validate();
    if (v.size() != traj.size()) throw InputError("xzero: speed profile and trajectory differ in length");
    if (traj.size() < 3) throw InputError("xzero: trajectory too short");

    XZeroResult out;
    out.model.origin = traj.points.front();
    out.model.duration = traj.grid().end_time();

    const std::size_t n = v.size();
    const double dt = v.dt;
    const double peak = *std::max_element(v.values.begin(), v.values.end());
    if (!(peak > 0.0)) return out;
    const double area = trapezoid(v.values, dt);
    const std::size_t max_strokes = cfg.max_strokes.value_or(2 * find_velocity_minima(v).times.size());

    std::vector<double> work = v.values;
    std::vector<double> rec(n, 0.0);
    std::vector<bool> exhausted(n, false);
    std::vector<LognormalStroke> strokes;
    double snr = scalar_snr(v.values, rec, dt);

    auto exhaust = [&](std::size_t k3) {
        const auto [k1, k5] = lobe_bounds(work, k3);
        for (std::size_t k = k1; k <= k5; ++k) exhausted[k] = true;
    };

    while (strokes.size() < max_strokes && snr < cfg.snr_target) {
        std::size_t k3 = n;
        for (std::size_t k = 0; k < n; ++k) {
            if (!exhausted[k] && (k3 == n || work[k] > work[k3])) k3 = k;
        }
        if (k3 == n || work[k3] < cfg.min_peak * peak) break;

        auto points = detect_characteristic_points(work, v.t0, dt, k3);
        if (!points) {
            exhaust(k3);
            continue;
        }
        auto est = try_estimate(*points);
        if (!est || !in_range(*est, cfg)) {
            est.reset();
            for (double factor : {0.5, 2.0}) {
                auto e = try_estimate(repick(*points, factor, work, v.t0, dt));
                if (e && in_range(*e, cfg)) {
                    est = e;
                    break;
                }
            }
        }
        LognormalStroke s;
        if (est) {
            s.D = est->D;
            s.t0 = est->t0;
            s.mu = est->mu;
            s.sigma = est->sigma;
        }
        const double stroke_peak = est ? s.D * lognormal_pdf(s.t0 + std::exp(s.mu - s.sigma * s.sigma), s.t0, s.mu,
                                                             s.sigma)
                                       : 0.0;
        if (!est || s.D < cfg.min_stroke_area * area || stroke_peak < cfg.min_peak * peak) {
            ++out.rejected;
            exhaust(k3);
            continue;
        }

        std::vector<double> trial = rec;
        std::vector<double> contribution(n, 0.0);
        const double t_end = s.support_end();
        for (std::size_t k = 0; k < n; ++k) {
            const double t = v.time(k);
            if (t > t_end) break;
            contribution[k] = s.D * lognormal_pdf(t, s.t0, s.mu, s.sigma);
            trial[k] += contribution[k];
        }
        const double trial_snr = scalar_snr(v.values, trial, dt);
        if (!(trial_snr > snr)) {
            ++out.rejected;
            exhaust(k3);
            continue;
        }
        rec = std::move(trial);
        snr = trial_snr;
        for (std::size_t k = 0; k < n; ++k) work[k] = std::max(0.0, work[k] - contribution[k]);
        strokes.push_back(s);
        out.snr_history.push_back(snr);
    }

    std::stable_sort(strokes.begin(), strokes.end(),
                     [](const LognormalStroke& a, const LognormalStroke& b) { return a.t0 < b.t0; });
    const auto vel = velocity(traj);
    std::vector<double> vx(n), vy(n);
    for (std::size_t k = 0; k < n; ++k) {
        vx[k] = vel[k].x;
        vy[k] = vel[k].y;
    }
    for (auto& s : strokes) {
        const double t3 = s.t0 + std::exp(s.mu - a_coeff(s.sigma, 3));
        const double phi3 = direction_at(vx, vy, traj.t0, dt, t3);
        const double phi2 = phi3 + wrap_angle(direction_at(vx, vy, traj.t0, dt, s.t0 + std::exp(s.mu - a_coeff(s.sigma, 2))) - phi3);
        const double phi4 = phi3 + wrap_angle(direction_at(vx, vy, traj.t0, dt, s.t0 + std::exp(s.mu - a_coeff(s.sigma, 4))) - phi3);
        const StrokeAngles a = xzero_angles(s, phi2, phi3, phi4);
        s.theta_s = a.theta_s;
        s.theta_e = a.theta_e;
    }
    out.model.strokes = std::move(strokes);
    return out;
}

}  // namespace idelog
