#pragma once

// Seeded generator of signature-like Sigma-Lognormal movements, used to
// build test corpora with known ground truth.

#include "idelog/lognormal_model.hpp"
#include "idelog/signal_core.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace idelog {

/// Parameter distributions, all uniform.
struct GeneratorConfig {
    int min_strokes = 4;
    int max_strokes = 12;
    double min_chord = 300.0;  ///< distance between consecutive target points
    double max_chord = 1500.0;
    double max_turn = 2.6;     ///< |heading change| between strokes, radians
    double max_sweep = 1.2;    ///< |theta_e - theta_s|
    double min_gap = 0.2;      ///< t0 spacing of consecutive strokes, seconds
    double max_gap = 0.45;
    double mu_min = -1.6;
    double mu_max = -1.0;
    double sigma_min = 0.15;
    double sigma_max = 0.35;
    double rate = 200.0;       ///< Hz

    void validate() const;
};

/// Per-signature variation of a writer's prototype, relative standard deviations
/// (angles in radians, mu additive).
struct WriterJitter {
    double chord = 0.06;
    double angle = 0.08;
    double timing = 0.06;
    double mu = 0.05;
    double sigma = 0.06;
};

struct SyntheticSignature {
    SigmaLognormalModel model;
    Trajectory trajectory;
    RawSignature raw;
};

/// One random model; the first stroke starts at t = 0 from the origin and the
/// duration covers every stroke up to t0 + exp(mu + 3 sigma).
SigmaLognormalModel random_model(std::mt19937_64& rng, const GeneratorConfig& cfg = {});

/// Samples the model on [0, duration] at `rate`, pen down throughout.
SyntheticSignature render(const SigmaLognormalModel& model, double rate, const std::string& source_id = {});

std::vector<SyntheticSignature> generate_corpus(std::uint64_t seed, std::size_t count, const GeneratorConfig& cfg = {});

/// Shared area of the unit-area speed profiles of consecutive strokes.
double max_consecutive_overlap(const SigmaLognormalModel& model);

/// Consecutive overlaps all below `limit`.
bool well_separated(const SigmaLognormalModel& model, double limit = 0.1);

/// At least `min_strokes` strokes and `min_duration` seconds.
bool is_long_movement(const SigmaLognormalModel& model, std::size_t min_strokes = 8, double min_duration = 3.0);

/// `writers` prototypes, each with `per_writer` jittered renditions.
std::vector<std::vector<SyntheticSignature>> generate_writers(std::uint64_t seed, std::size_t writers,
                                                              std::size_t per_writer, const GeneratorConfig& cfg = {},
                                                              const WriterJitter& jitter = {});

}  // namespace idelog
