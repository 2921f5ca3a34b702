#pragma once

// Signature-verification harness: DTW verifier over per-signature normalized
// features, the reference/probe protocol with random forgeries, DET curves,
// equal error rate, and the area between two DET curves.

#include "idelog/signal_core.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace idelog {

/// Row-major samples x channels.
struct FeatureSequence {
    std::size_t channels = 0;
    std::vector<double> data;

    std::size_t length() const { return channels == 0 ? 0 : data.size() / channels; }
    std::span<const double> frame(std::size_t i) const { return {data.data() + i * channels, channels}; }

    /// Builds a sequence from equally long channel columns, without normalization.
    static FeatureSequence from_channels(const std::vector<std::vector<double>>& columns);
};

struct ChannelMask {
    bool x = true;
    bool y = true;
    bool speed = true;
    bool acceleration = true;
    bool pen = true;

    static ChannelMask velocity_only() { return {false, false, true, false, false}; }
    std::size_t count() const { return std::size_t{x} + y + speed + acceleration + pen; }
};

/// Position, speed, acceleration magnitude and pen flag, each z-normalized
/// over the signature (a constant channel becomes all zeros). Every
/// `decimation`-th sample is kept after the derivatives are taken.
FeatureSequence extract_features(const Trajectory& traj, ChannelMask mask = {}, std::size_t decimation = 1);

/// DTW with Euclidean local cost and match/insert/delete steps, divided by the
/// number of cells on the optimal path. Throws InputError on empty input or
/// differing channel counts.
double dtw_distance(const FeatureSequence& a, const FeatureSequence& b);

/// Dissimilarity between a probe and one reference; lower means more alike.
using Verifier = std::function<double(const FeatureSequence& probe, const FeatureSequence& reference)>;

enum class ReferenceAggregation { min, mean };

struct ProtocolConfig {
    std::size_t references = 5;
    ReferenceAggregation aggregation = ReferenceAggregation::min;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

struct WriterSet {
    std::string id;
    std::vector<FeatureSequence> signatures;  ///< in acquisition order
};

/// Distance scores; a probe is accepted when its score is <= the threshold.
struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> impostor;
    std::vector<std::string> skipped_writers;
};

/// First `references` signatures of each writer enrol it; its remaining
/// signatures give genuine scores, the remaining signatures of every other
/// writer give impostor scores against it. Writers with too few signatures
/// are skipped and listed.
ScoreSet evaluate_protocol(const std::vector<WriterSet>& corpus, const Verifier& verifier = dtw_distance,
                           const ProtocolConfig& cfg = {});

struct DetPoint {
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
};

/// Ordered by increasing threshold: the first point (threshold -inf) has
/// FAR 0 and FRR 1, the last has FAR 1 and FRR 0.
struct DetCurve {
    std::vector<DetPoint> points;
};

struct DetResult {
    DetCurve curve;
    double eer = 0.0;
};

/// Sweeps the threshold over every observed score. EER is interpolated
/// linearly where FAR - FRR changes sign. Throws InputError on an empty set.
DetResult det_and_eer(const ScoreSet& scores);

/// Integral over FAR in [0, 1] of |FRR_a - FRR_b|, each curve read as a
/// piecewise-linear FRR(FAR) taking the lowest FRR at repeated FAR values.
double det_area_gap(const DetCurve& a, const DetCurve& b);

}  // namespace idelog
