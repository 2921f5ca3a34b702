#pragma once

// File formats: canonical and SVC-style signature text, JSON model files, and
// tab-separated plot data with a '#' header row.

#include "idelog/lognormal_model.hpp"
#include "idelog/metrics.hpp"
#include "idelog/signal_core.hpp"
#include "idelog/verification.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace idelog {

inline constexpr std::string_view kCanonicalHeader = "IDELOG/1";
inline constexpr int kModelFormatVersion = 1;

enum class SignatureFormat { canonical, svc };

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// `name` is used in error messages ("name:line: ...").
RawSignature parse_signature(std::istream& in, SignatureFormat format, const std::string& name = "<stream>");
RawSignature read_signature(const std::filesystem::path& path, SignatureFormat format);
/// canonical when the first non-empty line is the canonical header, else svc.
SignatureFormat detect_format(const std::filesystem::path& path);
RawSignature read_signature(const std::filesystem::path& path);

void write_signature(std::ostream& out, const RawSignature& sig);
void write_signature(const std::filesystem::path& path, const RawSignature& sig);

struct ModelFile {
    SigmaLognormalModel model;
    std::string source_file;
    std::string config_digest;
    std::string extractor;
    nlohmann::json config = nlohmann::json::object();
    /// Fields this version does not know, kept for read-modify-write.
    nlohmann::json extra = nlohmann::json::object();
    nlohmann::json provenance_extra = nlohmann::json::object();
};

nlohmann::json model_to_json(const ModelFile& file);
/// Throws InputError on a missing or different format_version or bad fields.
ModelFile model_from_json(const nlohmann::json& doc);

void write_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile read_model(const std::filesystem::path& path);

/// Column table with a '#'-prefixed, tab-separated header.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_table(std::ostream& out, const Table& table);
Table read_table(std::istream& in, const std::string& name = "<stream>");

/// t, observed and reconstructed x, y and speed, row per grid sample.
Table trajectory_table(const Trajectory& observed, const SpeedProfile& observed_speed,
                       const ReconstructedMovement& reconstructed);
Table det_table(const DetCurve& curve);
DetCurve det_from_table(const Table& table);
Table report_table(const ReconstructionReport& report);

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

}  // namespace idelog
