#pragma once

// Iterative refinement of the action plan: each interior virtual target point
// is moved, in stroke order, by a fraction of the gap between the observed
// and reconstructed salient points, and the geometry of its two adjacent
// strokes is re-derived. Lognormal timing parameters are never touched.

#include "idelog/lognormal_model.hpp"
#include "idelog/segmentation.hpp"
#include "idelog/spatial_extractor.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace idelog {

enum class SalientMatching {
    /// k-th interior observed minimum pairs with the k-th reconstructed one.
    by_order,
    /// Each observed minimum pairs with the reconstructed one closest in time
    /// (within half the neighbouring lobe), else with the reconstructed
    /// trajectory at the observed minimum time.
    nearest_time,
};

struct RefineConfig {
    double eta = 1.0;
    int passes = 2;
    double stop_delta_db = 0.1;
    SalientMatching matching = SalientMatching::nearest_time;

    void validate() const;
};

struct RefinePass {
    double snr_t = 0.0;
    double snr_v = 0.0;
    double max_salient_error = 0.0;
};

struct RefineTrace {
    RefinePass initial;
    std::vector<RefinePass> passes;  ///< one per completed pass
    std::size_t best_pass = 0;       ///< 0 = initial plan, k = after pass k
    /// Interior salient indices that had no reconstructed counterpart.
    std::vector<std::size_t> unmatched;
};

struct RefineResult {
    ActionPlan plan;
    SigmaLognormalModel model;
    RefineTrace trace;
};

/// ES_j = sp_j - spr_j.
Vec2 salient_error(Vec2 sp, Vec2 spr);

/// Copies the plan's angles and amplitudes into the model strokes.
void apply_plan(const ActionPlan& plan, SigmaLognormalModel& model);

/// Reconstructed salient point paired with each observed interior index
/// 1..N-1; entries are empty where no pairing exists.
std::vector<std::optional<Vec2>> match_salient_points(const SalientPointSet& observed,
                                                      const SalientPointSet& reconstructed,
                                                      SalientMatching matching);

/// Runs up to cfg.passes sweeps over tp_1 .. tp_{N-1} and returns the best
/// plan seen (by trajectory SNR), together with the per-pass trace.
RefineResult refine(const SigmaLognormalModel& model, const ActionPlan& plan, const SalientPointSet& observed,
                    const Trajectory& observed_traj, const SpeedProfile& observed_speed, const RefineConfig& cfg,
                    const SegmentationConfig& seg = {});

}  // namespace idelog
