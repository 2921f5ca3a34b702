#pragma once

// End-to-end extraction: preprocessing, segmentation, the separate kinematic
// and spatial fits, reconstruction, refinement and the final report. The
// baseline extractor runs through the same preprocessing and metrics.

#include "idelog/kinematic_extractor.hpp"
#include "idelog/lognormal_model.hpp"
#include "idelog/metrics.hpp"
#include "idelog/optimizer.hpp"
#include "idelog/segmentation.hpp"
#include "idelog/signal_core.hpp"
#include "idelog/spatial_extractor.hpp"
#include "idelog/xzero_baseline.hpp"

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace idelog {

enum class Extractor { idelog, xzero };

std::string to_string(Extractor e);
/// Throws InputError on an unknown name.
Extractor extractor_from_string(const std::string& name);

struct PipelineConfig {
    double rate = 200.0;  ///< resampling rate, Hz
    SmoothConfig smooth;  ///< smooth.enabled switches preprocessing on
    SegmentationConfig segmentation;
    KinematicConfig kinematic;
    RefineConfig refine;
    XZeroConfig xzero;
    Extractor extractor = Extractor::idelog;
    double path_scale = 1.0;  ///< grid cells per device unit for the 8-connected path

    void validate() const;
    nlohmann::json to_json() const;
    /// Starts from the defaults; unknown keys are an InputError.
    static PipelineConfig from_json(const nlohmann::json& doc);
    /// Hash of the canonical JSON form.
    std::string digest() const;
};

struct DecompositionResult {
    SigmaLognormalModel model;
    ActionPlan plan;
    ReconstructionReport report;
    std::string config_digest;
    Extractor extractor = Extractor::idelog;

    // Intermediate stages, kept for inspection and before/after exports.
    Trajectory observed;
    SpeedProfile observed_speed;
    SalientPointSet salient;
    std::vector<KinematicFit> fits;
    SigmaLognormalModel initial_model;
    ReconstructionReport initial_report;
    RefineTrace trace;
    ReconstructedMovement reconstruction;
    std::vector<std::string> log;
};

/// Errors are rethrown with the same type and the failing stage prefixed.
DecompositionResult decompose(const RawSignature& raw, const PipelineConfig& cfg);

struct CorpusEntry {
    std::variant<DecompositionResult, std::string> outcome;  ///< result or error message
    int error_kind = 0;                                      ///< 0 ok, 2 input, 3 numeric

    bool ok() const { return outcome.index() == 0; }
    const DecompositionResult& result() const { return std::get<0>(outcome); }
    const std::string& error() const { return std::get<1>(outcome); }
};

/// Decomposes every signature, in parallel, returning entries in input order.
std::vector<CorpusEntry> decompose_corpus(const std::vector<RawSignature>& corpus, const PipelineConfig& cfg,
                                          unsigned threads = 0);

}  // namespace idelog
