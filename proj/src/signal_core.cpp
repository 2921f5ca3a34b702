#include "idelog/signal_core.hpp"

#include <algorithm>
#include <complex>
#include <cstdlib>

namespace idelog {

void RawSignature::validate() const {
    if (samples.size() < 2) {
        throw InputError("signature '" + source_id + "' has fewer than 2 samples");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.p)) {
            throw InputError("signature '" + source_id + "': non-finite value in sample " + std::to_string(i));
        }
        if (i > 0 && !(s.t > samples[i - 1].t)) {
            throw InputError("signature '" + source_id + "': timestamps not strictly increasing at sample " +
                             std::to_string(i));
        }
    }
}

std::size_t TimeGrid::index_of(double t) const {
    if (size == 0) return 0;
    const double k = std::round((t - t0) / dt);
    if (k <= 0.0) return 0;
    const auto idx = static_cast<std::size_t>(k);
    return std::min(idx, size - 1);
}

Vec2 DiscretePath::position(std::size_t cell) const {
    const auto& c = cells.at(cell);
    return {static_cast<double>(c.x) / scale, static_cast<double>(c.y) / scale};
}

// ---------------------------------------------------------------------------
// Interpolation

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 2) throw InputError("spline needs at least 2 matching knots");
    if (n < 3) return;
    // Tridiagonal system for the interior second derivatives, natural ends.
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    // Forward sweep (Thomas algorithm); lower[i] = h0 of row i.
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double lower = x_[i] - x_[i - 1];
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
        if (i == 1) break;
    }
}

double CubicSpline::operator()(double t) const {
    const std::size_t n = x_.size();
    std::size_t k;
    if (t <= x_.front()) {
        k = 0;
    } else if (t >= x_.back()) {
        k = n - 2;
    } else {
        k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    }
    const double h = x_[k + 1] - x_[k];
    if (std::abs(t - x_[k]) <= 1e-9 * h) return y_[k];
    if (std::abs(t - x_[k + 1]) <= 1e-9 * h) return y_[k + 1];
    const double a = (x_[k + 1] - t) / h;
    const double b = 1.0 - a;
    return a * y_[k] + b * y_[k + 1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * h * h / 6.0;
}

namespace {

double linear_at(const std::vector<double>& x, const std::vector<double>& y, double t) {
    const std::size_t n = x.size();
    std::size_t k;
    if (t <= x.front()) {
        k = 0;
    } else if (t >= x.back()) {
        k = n - 2;
    } else {
        k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    }
    const double h = x[k + 1] - x[k];
    if (std::abs(t - x[k]) <= 1e-9 * h) return y[k];
    if (std::abs(t - x[k + 1]) <= 1e-9 * h) return y[k + 1];
    const double b = (t - x[k]) / h;
    return (1.0 - b) * y[k] + b * y[k + 1];
}

}  // namespace

Resampled resample(const RawSignature& raw, double target_rate) {
    raw.validate();
    if (!(target_rate > 0.0) || !std::isfinite(target_rate)) {
        throw InputError("resample: target rate must be positive");
    }
    const auto& s = raw.samples;
    std::vector<double> ts, xs, ys;
    ts.reserve(s.size());
    xs.reserve(s.size());
    ys.reserve(s.size());
    for (const auto& p : s) {
        ts.push_back(p.t);
        xs.push_back(p.x);
        ys.push_back(p.y);
    }

    const double dt = 1.0 / target_rate;
    const double span = ts.back() - ts.front();
    const auto n = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;

    Resampled out;
    out.trajectory.t0 = ts.front();
    out.trajectory.dt = dt;
    out.trajectory.points.resize(n);
    out.trajectory.pen_down.resize(n);

    const bool cubic = s.size() >= 4;
    out.method = cubic ? Interpolation::cubic_spline : Interpolation::linear;
    if (cubic) {
        const CubicSpline sx(ts, xs);
        const CubicSpline sy(ts, ys);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = ts.front() + static_cast<double>(i) * dt;
            out.trajectory.points[i] = {sx(t), sy(t)};
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = ts.front() + static_cast<double>(i) * dt;
            out.trajectory.points[i] = {linear_at(ts, xs, t), linear_at(ts, ys, t)};
        }
    }

    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = ts.front() + static_cast<double>(i) * dt;
        while (k + 1 < s.size() && s[k + 1].t <= t + 1e-9 * dt) ++k;
        out.trajectory.pen_down[i] = s[k].pen_down;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Smoothing

std::vector<Biquad> design_lowpass(const SmoothConfig& cfg, double sample_rate) {
    if (cfg.order < 1) throw InputError("smoothing filter order must be >= 1");
    const double nyquist = 0.5 * sample_rate;
    if (!(cfg.cutoff_hz > 0.0) || !(cfg.cutoff_hz < nyquist)) {
        throw InputError("smoothing cutoff " + std::to_string(cfg.cutoff_hz) + " Hz must lie in (0, Nyquist = " +
                         std::to_string(nyquist) + " Hz)");
    }
    const int n = cfg.order;
    const double k = 2.0 * sample_rate;
    const double warped = k * std::tan(kPi * cfg.cutoff_hz / sample_rate);

    double sinh_v = 1.0, cosh_v = 1.0;
    if (cfg.family == FilterFamily::chebyshev1) {
        if (!(cfg.ripple_db > 0.0)) throw InputError("chebyshev ripple must be > 0 dB");
        const double eps = std::sqrt(std::pow(10.0, cfg.ripple_db / 10.0) - 1.0);
        const double v0 = std::asinh(1.0 / eps) / n;
        sinh_v = std::sinh(v0);
        cosh_v = std::cosh(v0);
    }

    std::vector<Biquad> sections;
    for (int i = 1; i <= n / 2; ++i) {
        const double theta = (2.0 * i - 1.0) * kPi / (2.0 * n);
        const std::complex<double> pole = warped * std::complex<double>(-sinh_v * std::sin(theta), cosh_v * std::cos(theta));
        const double re = pole.real();
        const double mag2 = std::norm(pole);
        const double a0 = k * k - 2.0 * re * k + mag2;
        Biquad bq;
        bq.b0 = mag2 / a0;
        bq.b1 = 2.0 * mag2 / a0;
        bq.b2 = mag2 / a0;
        bq.a1 = (2.0 * mag2 - 2.0 * k * k) / a0;
        bq.a2 = (k * k + 2.0 * re * k + mag2) / a0;
        sections.push_back(bq);
    }
    if (n % 2 == 1) {
        const double w = warped * sinh_v;
        Biquad fo;
        fo.b0 = w / (k + w);
        fo.b1 = w / (k + w);
        fo.a1 = (w - k) / (k + w);
        sections.push_back(fo);
    }
    return sections;
}

namespace {

void run_sections(std::span<const Biquad> sections, std::vector<double>& x) {
    if (x.empty()) return;
    for (const auto& s : sections) {
        // Steady state for a constant input equal to the first sample.
        const double u = x.front();
        double z2 = (s.b2 - s.a2) * u;
        double z1 = (s.b1 - s.a1) * u + z2;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace

std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> signal) {
    const std::size_t n = signal.size();
    if (n < 2 || sections.empty()) return {signal.begin(), signal.end()};
    // Longer than the usual 3x filter length: short pads leave an edge transient
    // that shows up as a spurious speed minimum next to the first sample.
    const std::size_t pad = std::min(n - 1, 10 * (2 * sections.size() + 1));

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
    ext.insert(ext.end(), signal.begin(), signal.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

    run_sections(sections, ext);
    std::reverse(ext.begin(), ext.end());
    run_sections(sections, ext);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Trajectory smooth(const Trajectory& traj, const SmoothConfig& cfg) {
    if (!cfg.enabled) return traj;
    if (!(traj.dt > 0.0)) throw InputError("smooth: trajectory has non-positive time step");
    const auto sections = design_lowpass(cfg, 1.0 / traj.dt);
    std::vector<double> xs(traj.size()), ys(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        xs[i] = traj.points[i].x;
        ys[i] = traj.points[i].y;
    }
    const auto fx = filtfilt(sections, xs);
    const auto fy = filtfilt(sections, ys);
    Trajectory out = traj;
    for (std::size_t i = 0; i < traj.size(); ++i) out.points[i] = {fx[i], fy[i]};
    return out;
}

// ---------------------------------------------------------------------------
// Derivatives

std::vector<Vec2> velocity(const Trajectory& traj) {
    const std::size_t n = traj.size();
    std::vector<Vec2> v(n);
    if (n < 2) return v;
    const auto& p = traj.points;
    v[0] = (p[1] - p[0]) / traj.dt;
    v[n - 1] = (p[n - 1] - p[n - 2]) / traj.dt;
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] = (p[i + 1] - p[i - 1]) / (2.0 * traj.dt);
    return v;
}

SpeedProfile speed_profile(const Trajectory& traj) {
    if (traj.size() < 3) throw InputError("speed profile needs at least 3 trajectory points");
    const auto v = velocity(traj);
    SpeedProfile out{traj.t0, traj.dt, {}};
    out.values.reserve(v.size());
    for (const auto& w : v) out.values.push_back(norm(w));
    return out;
}

// ---------------------------------------------------------------------------
// 8-connected path

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void append_cell(DiscretePath& path, GridCell c) {
    if (!path.cells.empty()) {
        const GridCell last = path.cells.back();
        if (last == c) return;
        const long dx = std::labs(c.x - last.x);
        const long dy = std::labs(c.y - last.y);
        const double step = (dx != 0 && dy != 0) ? kSqrt2 : 1.0;
        path.cumulative_length.push_back(path.cumulative_length.back() + step);
    } else {
        path.cumulative_length.push_back(0.0);
    }
    path.cells.push_back(c);
}

// Bresenham from a (exclusive) to b (inclusive).
void bresenham(DiscretePath& path, GridCell a, GridCell b) {
    long x = a.x, y = a.y;
    const long dx = std::labs(b.x - a.x);
    const long dy = -std::labs(b.y - a.y);
    const long sx = a.x < b.x ? 1 : -1;
    const long sy = a.y < b.y ? 1 : -1;
    long err = dx + dy;
    while (x != b.x || y != b.y) {
        const long e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
        append_cell(path, {x, y});
    }
}

}  // namespace

DiscretePath eight_connected(const Trajectory& traj, double scale) {
    if (!(scale > 0.0)) throw InputError("8-connected path scale must be positive");
    DiscretePath path;
    path.scale = scale;
    path.sample_anchor.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const GridCell c{std::lround(traj.points[i].x * scale), std::lround(traj.points[i].y * scale)};
        if (path.cells.empty()) {
            append_cell(path, c);
        } else {
            bresenham(path, path.cells.back(), c);
        }
        path.sample_anchor.push_back(path.cells.size() - 1);
    }
    return path;
}

std::size_t path_midpoint_index(const DiscretePath& path, std::size_t a, std::size_t b) {
    if (b >= path.size() || a > b) throw InputError("path_midpoint: invalid cell range");
    if (a == b) return a;
    const auto& len = path.cumulative_length;
    const double target = 0.5 * (len[a] + len[b]);
    const auto first = len.begin() + static_cast<std::ptrdiff_t>(a);
    const auto last = len.begin() + static_cast<std::ptrdiff_t>(b) + 1;
    auto it = std::lower_bound(first, last, target);
    std::size_t hi = static_cast<std::size_t>(it - len.begin());
    if (hi > b) hi = b;
    std::size_t best = hi;
    if (hi > a) {
        const std::size_t lo = hi - 1;
        if (std::abs(len[lo] - target) <= std::abs(len[hi] - target)) best = lo;
    }
    // Walk left over equal-length duplicates so ties resolve to the lower index.
    while (best > a && std::abs(len[best - 1] - target) <= std::abs(len[best] - target)) --best;
    return best;
}

Vec2 path_midpoint(const DiscretePath& path, std::size_t a, std::size_t b) {
    return path.position(path_midpoint_index(path, a, b));
}

}  // namespace idelog
