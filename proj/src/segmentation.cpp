#include "idelog/segmentation.hpp"

#include <algorithm>
#include <bit>

namespace idelog {

namespace {

// O(1) range-maximum queries over a fixed sequence.
class RangeMax {
public:
    explicit RangeMax(const std::vector<double>& v) {
        const std::size_t n = v.size();
        table_.push_back(v);
        for (std::size_t w = 1; 2 * w <= n; w *= 2) {
            const auto& prev = table_.back();
            std::vector<double> next(n - 2 * w + 1);
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::max(prev[i], prev[i + w]);
            table_.push_back(std::move(next));
        }
    }

    // max over [a, b], inclusive
    double query(std::size_t a, std::size_t b) const {
        const std::size_t len = b - a + 1;
        const auto level = static_cast<std::size_t>(std::bit_width(len) - 1);
        const std::size_t w = std::size_t{1} << level;
        return std::max(table_[level][a], table_[level][b + 1 - w]);
    }

private:
    std::vector<std::vector<double>> table_;
};

void merge_close_minima(std::vector<std::size_t>& idx, const std::vector<double>& v, double dt, double min_duration) {
    bool changed = true;
    while (changed && idx.size() > 2) {
        changed = false;
        for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
            const double gap = static_cast<double>(idx[k + 1] - idx[k]) * dt;
            if (gap >= min_duration) continue;
            const bool left_is_end = (k == 0);
            const bool right_is_end = (k + 1 == idx.size() - 1);
            if (left_is_end && right_is_end) break;
            std::size_t drop;
            if (left_is_end) {
                drop = k + 1;
            } else if (right_is_end) {
                drop = k;
            } else {
                // keep the deeper one; equal depth keeps the earlier
                drop = (v[idx[k + 1]] >= v[idx[k]]) ? k + 1 : k;
            }
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(drop));
            changed = true;
            break;
        }
    }
}

void filter_by_prominence(std::vector<std::size_t>& idx, const std::vector<double>& v, double threshold) {
    const RangeMax rmq(v);
    while (idx.size() > 2) {
        double weakest = threshold;
        std::size_t weakest_k = 0;
        for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
            const double left = rmq.query(idx[k - 1], idx[k]);
            const double right = rmq.query(idx[k], idx[k + 1]);
            const double prominence = std::min(left, right) - v[idx[k]];
            if (prominence < weakest) {
                weakest = prominence;
                weakest_k = k;
            }
        }
        if (weakest_k == 0) break;
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(weakest_k));
    }
}

}  // namespace

VelocityMinima find_velocity_minima(const SpeedProfile& v, const SegmentationConfig& cfg) {
    const auto& s = v.values;
    const std::size_t n = s.size();
    if (n == 0) throw InputError("find_velocity_minima: empty speed profile");

    std::vector<std::size_t> idx{0};
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(s[i] < s[i - 1])) continue;
        std::size_t k = i;
        while (k + 1 < n && s[k + 1] == s[i]) ++k;
        if (k + 1 < n && s[k + 1] > s[i]) idx.push_back(i);
        i = k;
    }
    if (n > 1) idx.push_back(n - 1);

    if (cfg.filter_enabled && idx.size() > 2) {
        if (cfg.min_lobe_duration > 0.0) merge_close_minima(idx, s, v.dt, cfg.min_lobe_duration);
        const double peak = *std::max_element(s.begin(), s.end());
        if (cfg.min_prominence > 0.0 && peak > 0.0) filter_by_prominence(idx, s, cfg.min_prominence * peak);
    }

    VelocityMinima out;
    out.indices = idx;
    out.times.reserve(idx.size());
    for (auto i : idx) out.times.push_back(v.time(i));
    if (n == 1) {
        out.indices.push_back(0);
        out.times.push_back(v.time(0));
    }
    return out;
}

std::vector<VelocityLobe> extract_lobes(const SpeedProfile& v, const VelocityMinima& minima) {
    std::vector<VelocityLobe> lobes;
    if (minima.indices.size() < 2) return lobes;
    lobes.reserve(minima.indices.size() - 1);
    for (std::size_t j = 1; j < minima.indices.size(); ++j) {
        const std::size_t a = minima.indices[j - 1];
        const std::size_t b = minima.indices[j];
        if (b < a || b >= v.size()) throw InputError("extract_lobes: minima out of order or out of range");
        VelocityLobe lobe;
        lobe.stroke_index = j;
        lobe.begin = a;
        lobe.dt = v.dt;
        lobe.t_start = v.time(a);
        lobe.t_end = v.time(b);
        lobe.values.assign(v.values.begin() + static_cast<std::ptrdiff_t>(a),
                           v.values.begin() + static_cast<std::ptrdiff_t>(b) + 1);
        lobe.shares_start = j > 1;
        lobes.push_back(std::move(lobe));
    }
    return lobes;
}

SalientPointSet locate_salient_points(const VelocityMinima& minima, const Trajectory& traj, const DiscretePath* path) {
    if (traj.size() == 0) throw InputError("locate_salient_points: empty trajectory");
    SalientPointSet sp;
    const TimeGrid grid = traj.grid();
    const std::size_t m = minima.times.size();
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t i;
        if (j == 0) {
            i = 0;
        } else if (j + 1 == m) {
            i = traj.size() - 1;
        } else {
            i = grid.index_of(minima.times[j]);
        }
        sp.times.push_back(minima.times[j]);
        sp.indices.push_back(i);
        sp.points.push_back(traj.points[i]);
        if (path != nullptr) sp.path_cells.push_back(path->sample_anchor.at(i));
    }
    return sp;
}

}  // namespace idelog
