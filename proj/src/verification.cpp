#include "idelog/verification.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <limits>
#include <thread>

namespace idelog {

FeatureSequence FeatureSequence::from_channels(const std::vector<std::vector<double>>& columns) {
    FeatureSequence f;
    f.channels = columns.size();
    if (columns.empty()) return f;
    const std::size_t n = columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != n) throw InputError("feature channels differ in length");
    }
    f.data.resize(n * f.channels);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < f.channels; ++c) f.data[i * f.channels + c] = columns[c][i];
    }
    return f;
}

namespace {

void z_normalize(std::vector<double>& c) {
    const double n = static_cast<double>(c.size());
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : c) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    for (double& v : c) v = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? (v - mean) / sd : 0.0;
}

}  // namespace

FeatureSequence extract_features(const Trajectory& traj, ChannelMask mask, std::size_t decimation) {
    if (traj.size() < 3) throw InputError("extract_features: trajectory too short");
    if (decimation == 0) throw InputError("extract_features: decimation must be >= 1");
    if (mask.count() == 0) throw InputError("extract_features: no channel selected");
    const std::size_t n = traj.size();

    const auto vel = velocity(traj);
    Trajectory vel_as_traj{traj.t0, traj.dt, vel, {}};
    const auto acc = velocity(vel_as_traj);

    std::vector<std::vector<double>> columns;
    auto add = [&](auto value_of) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = value_of(i);
        z_normalize(c);
        columns.push_back(std::move(c));
    };
    if (mask.x) add([&](std::size_t i) { return traj.points[i].x; });
    if (mask.y) add([&](std::size_t i) { return traj.points[i].y; });
    if (mask.speed) add([&](std::size_t i) { return norm(vel[i]); });
    if (mask.acceleration) add([&](std::size_t i) { return norm(acc[i]); });
    if (mask.pen) add([&](std::size_t i) { return traj.pen_down.empty() || traj.pen_down[i] ? 1.0 : 0.0; });

    if (decimation > 1) {
        for (auto& c : columns) {
            std::vector<double> kept;
            for (std::size_t i = 0; i < n; i += decimation) kept.push_back(c[i]);
            c = std::move(kept);
        }
    }
    return FeatureSequence::from_channels(columns);
}

double dtw_distance(const FeatureSequence& a, const FeatureSequence& b) {
    if (a.length() == 0 || b.length() == 0) throw InputError("dtw_distance: empty sequence");
    if (a.channels != b.channels) throw InputError("dtw_distance: channel counts differ");
    const std::size_t n = a.length();
    const std::size_t m = b.length();

    // Two rolling rows of (accumulated cost, path length).
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    std::vector<std::size_t> prev_len(m + 1, 0), cur_len(m + 1, 0);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = inf;
        const auto fa = a.frame(i - 1);
        for (std::size_t j = 1; j <= m; ++j) {
            const auto fb = b.frame(j - 1);
            double d2 = 0.0;
            for (std::size_t c = 0; c < a.channels; ++c) d2 += (fa[c] - fb[c]) * (fa[c] - fb[c]);
            // Ties prefer the diagonal, then the shorter path.
            double best = prev[j - 1];
            std::size_t len = prev_len[j - 1];
            if (prev[j] < best || (prev[j] == best && prev_len[j] < len)) {
                best = prev[j];
                len = prev_len[j];
            }
            if (cur[j - 1] < best || (cur[j - 1] == best && cur_len[j - 1] < len)) {
                best = cur[j - 1];
                len = cur_len[j - 1];
            }
            cur[j] = best + std::sqrt(d2);
            cur_len[j] = len + 1;
        }
        std::swap(prev, cur);
        std::swap(prev_len, cur_len);
    }
    return prev[m] / static_cast<double>(prev_len[m]);
}

ScoreSet evaluate_protocol(const std::vector<WriterSet>& corpus, const Verifier& verifier, const ProtocolConfig& cfg) {
    if (cfg.references == 0) throw InputError("evaluate_protocol: need at least one reference");
    ScoreSet scores;
    std::vector<const WriterSet*> eligible;
    for (const auto& w : corpus) {
        if (w.signatures.size() > cfg.references) {
            eligible.push_back(&w);
        } else {
            scores.skipped_writers.push_back(w.id);
        }
    }

    auto score = [&](const FeatureSequence& probe, const WriterSet& claimed) {
        double agg = cfg.aggregation == ReferenceAggregation::min ? std::numeric_limits<double>::infinity() : 0.0;
        for (std::size_t r = 0; r < cfg.references; ++r) {
            const double d = verifier(probe, claimed.signatures[r]);
            agg = cfg.aggregation == ReferenceAggregation::min ? std::min(agg, d) : agg + d;
        }
        return cfg.aggregation == ReferenceAggregation::min ? agg : agg / static_cast<double>(cfg.references);
    };

    struct WriterScores {
        std::vector<double> genuine, impostor;
    };
    auto run = [&](std::size_t w) {
        WriterScores out;
        const WriterSet& claimed = *eligible[w];
        for (std::size_t s = cfg.references; s < claimed.signatures.size(); ++s) {
            out.genuine.push_back(score(claimed.signatures[s], claimed));
        }
        for (std::size_t o = 0; o < eligible.size(); ++o) {
            if (o == w) continue;
            for (std::size_t s = cfg.references; s < eligible[o]->signatures.size(); ++s) {
                out.impostor.push_back(score(eligible[o]->signatures[s], claimed));
            }
        }
        return out;
    };

    const unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<WriterScores> per_writer(eligible.size());
    if (threads <= 1) {
        for (std::size_t w = 0; w < eligible.size(); ++w) per_writer[w] = run(w);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(threads, eligible.size()); ++t) {
            pool.emplace_back([&] {
                for (std::size_t w = next++; w < eligible.size(); w = next++) per_writer[w] = run(w);
            });
        }
    }
    for (auto& ws : per_writer) {
        scores.genuine.insert(scores.genuine.end(), ws.genuine.begin(), ws.genuine.end());
        scores.impostor.insert(scores.impostor.end(), ws.impostor.begin(), ws.impostor.end());
    }
    return scores;
}

DetResult det_and_eer(const ScoreSet& scores) {
    if (scores.genuine.empty() || scores.impostor.empty()) throw InputError("det_and_eer: empty score set");
    std::vector<double> gen = scores.genuine;
    std::vector<double> imp = scores.impostor;
    std::sort(gen.begin(), gen.end());
    std::sort(imp.begin(), imp.end());
    std::vector<double> thresholds;
    thresholds.reserve(gen.size() + imp.size());
    std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    DetResult r;
    r.curve.points.push_back({-std::numeric_limits<double>::infinity(), 0.0, 1.0});
    const double ng = static_cast<double>(gen.size());
    const double ni = static_cast<double>(imp.size());
    for (double th : thresholds) {
        const auto acc_imp = std::upper_bound(imp.begin(), imp.end(), th) - imp.begin();
        const auto acc_gen = std::upper_bound(gen.begin(), gen.end(), th) - gen.begin();
        r.curve.points.push_back({th, static_cast<double>(acc_imp) / ni, 1.0 - static_cast<double>(acc_gen) / ng});
    }

    const auto& pts = r.curve.points;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const double d = pts[k].far - pts[k].frr;
        if (d < 0.0) continue;
        if (d == 0.0) {
            r.eer = pts[k].far;
        } else {
            const double d0 = pts[k - 1].far - pts[k - 1].frr;
            const double f = -d0 / (d - d0);
            r.eer = pts[k - 1].far + f * (pts[k].far - pts[k - 1].far);
        }
        break;
    }
    return r;
}

namespace {

// FRR as a function of FAR: sorted unique FAR knots, lowest FRR per knot.
std::vector<std::pair<double, double>> frr_of_far(const DetCurve& c) {
    std::vector<std::pair<double, double>> k;
    for (const auto& p : c.points) k.emplace_back(p.far, p.frr);
    std::sort(k.begin(), k.end());
    std::vector<std::pair<double, double>> out;
    for (const auto& [far, frr] : k) {
        if (!out.empty() && out.back().first == far) continue;  // sorted: first is the lowest FRR
        out.emplace_back(far, frr);
    }
    if (out.empty()) throw InputError("det_area_gap: empty curve");
    return out;
}

double eval(const std::vector<std::pair<double, double>>& f, double x) {
    if (x <= f.front().first) return f.front().second;
    if (x >= f.back().first) return f.back().second;
    const auto it = std::upper_bound(f.begin(), f.end(), std::pair{x, std::numeric_limits<double>::infinity()});
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

double det_area_gap(const DetCurve& a, const DetCurve& b) {
    const auto fa = frr_of_far(a);
    const auto fb = frr_of_far(b);
    std::vector<double> xs{0.0, 1.0};
    for (const auto& p : fa) xs.push_back(std::clamp(p.first, 0.0, 1.0));
    for (const auto& p : fb) xs.push_back(std::clamp(p.first, 0.0, 1.0));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double w = xs[i + 1] - xs[i];
        const double d0 = eval(fa, xs[i]) - eval(fb, xs[i]);
        const double d1 = eval(fa, xs[i + 1]) - eval(fb, xs[i + 1]);
        if (d0 * d1 >= 0.0) {
            area += 0.5 * w * (std::abs(d0) + std::abs(d1));
        } else {
            // The difference changes sign inside the interval.
            area += 0.5 * w * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
        }
    }
    return area;
}

}  // namespace idelog
