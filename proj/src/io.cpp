#include "idelog/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace idelog {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

[[noreturn]] void fail(const std::string& name, std::size_t line, const std::string& what) {
    throw InputError(name + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t b = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

bool parse_number(std::string_view tok, double& v) {
    if (tok == "nan" || tok == "inf" || tok == "-inf") {
        v = tok == "nan" ? std::numeric_limits<double>::quiet_NaN()
                         : (tok == "inf" ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity());
        return true;
    }
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    return r.ec == std::errc{} && r.ptr == tok.data() + tok.size();
}

bool blank(std::string_view s) { return split_ws(s).empty(); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

void check_monotone(const RawSignature& sig, const std::vector<std::size_t>& lines, const std::string& name) {
    for (std::size_t i = 1; i < sig.samples.size(); ++i) {
        if (!(sig.samples[i].t > sig.samples[i - 1].t)) fail(name, lines[i], "timestamps are not strictly increasing");
    }
}

RawSignature parse_canonical(std::istream& in, const std::string& name) {
    RawSignature sig;
    sig.source_id = name;
    std::vector<std::size_t> lines;
    std::string line;
    std::size_t no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!header) {
            if (t != kCanonicalHeader) fail(name, no, "expected header " + std::string(kCanonicalHeader));
            header = true;
            continue;
        }
        const auto tok = split_ws(t);
        if (tok.size() != 4) fail(name, no, "expected 4 fields 't x y p', got " + std::to_string(tok.size()));
        PenSample s;
        double* dst[] = {&s.t, &s.x, &s.y, &s.p};
        for (std::size_t k = 0; k < 4; ++k) {
            if (!parse_number(tok[k], *dst[k]) || !std::isfinite(*dst[k])) {
                fail(name, no, "bad number '" + std::string(tok[k]) + "'");
            }
        }
        s.pen_down = s.p > 0.0;
        sig.samples.push_back(s);
        lines.push_back(no);
    }
    if (!header) fail(name, no, "missing header " + std::string(kCanonicalHeader));
    check_monotone(sig, lines, name);
    return sig;
}

RawSignature parse_svc(std::istream& in, const std::string& name) {
    RawSignature sig;
    sig.source_id = name;
    std::vector<std::size_t> lines;
    std::string line;
    std::size_t no = 0;
    long declared = -1;
    std::size_t declared_line = 0;
    while (std::getline(in, line)) {
        ++no;
        if (blank(line)) continue;
        const auto tok = split_ws(line);
        if (declared < 0) {
            double n = 0.0;
            if (tok.size() != 1 || !parse_number(tok[0], n) || n < 0 || n != std::floor(n)) {
                fail(name, no, "first line must be the point count");
            }
            declared = static_cast<long>(n);
            declared_line = no;
            continue;
        }
        if (tok.size() != 4 && tok.size() != 7) {
            fail(name, no, "expected 4 or 7 fields, got " + std::to_string(tok.size()));
        }
        double f[7] = {0, 0, 0, 0, 0, 0, 0};
        for (std::size_t k = 0; k < tok.size(); ++k) {
            if (!parse_number(tok[k], f[k]) || !std::isfinite(f[k])) {
                fail(name, no, "bad number '" + std::string(tok[k]) + "'");
            }
        }
        PenSample s;
        s.x = f[0];
        s.y = f[1];
        s.t = f[2] / 1000.0;
        const double button = f[3];
        s.p = tok.size() == 7 ? f[6] : (button != 0.0 ? 1.0 : 0.0);
        s.pen_down = s.p > 0.0 || button != 0.0;
        sig.samples.push_back(s);
        lines.push_back(no);
    }
    if (declared < 0) fail(name, no, "empty file");
    if (static_cast<std::size_t>(declared) != sig.samples.size()) {
        fail(name, declared_line,
             "declared " + std::to_string(declared) + " points but found " + std::to_string(sig.samples.size()));
    }
    check_monotone(sig, lines, name);
    return sig;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

}  // namespace

RawSignature parse_signature(std::istream& in, SignatureFormat format, const std::string& name) {
    return format == SignatureFormat::canonical ? parse_canonical(in, name) : parse_svc(in, name);
}

RawSignature read_signature(const std::filesystem::path& path, SignatureFormat format) {
    auto in = open_in(path);
    return parse_signature(in, format, path.string());
}

SignatureFormat detect_format(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        return t == kCanonicalHeader ? SignatureFormat::canonical : SignatureFormat::svc;
    }
    return SignatureFormat::svc;
}

RawSignature read_signature(const std::filesystem::path& path) { return read_signature(path, detect_format(path)); }

void write_signature(std::ostream& out, const RawSignature& sig) {
    out << kCanonicalHeader << '\n';
    for (const auto& s : sig.samples) {
        out << format_double(s.t) << ' ' << format_double(s.x) << ' ' << format_double(s.y) << ' '
            << format_double(s.p) << '\n';
    }
}

void write_signature(const std::filesystem::path& path, const RawSignature& sig) {
    auto out = open_out(path);
    write_signature(out, sig);
}

nlohmann::json model_to_json(const ModelFile& file) {
    nlohmann::json doc = file.extra;
    doc["format_version"] = kModelFormatVersion;
    doc["origin"] = {file.model.origin.x, file.model.origin.y};
    doc["duration"] = file.model.duration;
    auto strokes = nlohmann::json::array();
    for (const auto& s : file.model.strokes) {
        strokes.push_back({{"D", s.D},
                           {"t0", s.t0},
                           {"mu", s.mu},
                           {"sigma", s.sigma},
                           {"theta_s", s.theta_s},
                           {"theta_e", s.theta_e}});
    }
    doc["strokes"] = std::move(strokes);
    nlohmann::json prov = file.provenance_extra;
    prov["source_file"] = file.source_file;
    prov["config_digest"] = file.config_digest;
    prov["extractor"] = file.extractor;
    prov["config"] = file.config;
    doc["provenance"] = std::move(prov);
    return doc;
}

namespace {

double number_at(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number()) throw InputError(std::string("model file: missing number '") + key + "'");
    return obj[key].get<double>();
}

std::string string_at(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key)) return {};
    if (!obj[key].is_string()) throw InputError(std::string("model file: '") + key + "' must be a string");
    return obj[key].get<std::string>();
}

}  // namespace

ModelFile model_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw InputError("model file: top level must be an object");
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw InputError("model file: missing format_version");
    }
    const int version = doc["format_version"].get<int>();
    if (version != kModelFormatVersion) {
        throw InputError("model file: unsupported format_version " + std::to_string(version) + " (expected " +
                         std::to_string(kModelFormatVersion) + ")");
    }
    ModelFile f;
    const auto& origin = doc.at("origin");
    if (!origin.is_array() || origin.size() != 2 || !origin[0].is_number() || !origin[1].is_number()) {
        throw InputError("model file: origin must be [x, y]");
    }
    f.model.origin = {origin[0].get<double>(), origin[1].get<double>()};
    f.model.duration = number_at(doc, "duration");
    if (!doc.contains("strokes") || !doc["strokes"].is_array()) throw InputError("model file: missing strokes array");
    for (const auto& js : doc["strokes"]) {
        LognormalStroke s;
        s.D = number_at(js, "D");
        s.t0 = number_at(js, "t0");
        s.mu = number_at(js, "mu");
        s.sigma = number_at(js, "sigma");
        s.theta_s = number_at(js, "theta_s");
        s.theta_e = number_at(js, "theta_e");
        f.model.strokes.push_back(s);
    }
    f.model.validate();

    if (doc.contains("provenance")) {
        const auto& prov = doc["provenance"];
        if (!prov.is_object()) throw InputError("model file: provenance must be an object");
        f.source_file = string_at(prov, "source_file");
        f.config_digest = string_at(prov, "config_digest");
        f.extractor = string_at(prov, "extractor");
        if (prov.contains("config")) f.config = prov["config"];
        for (const auto& [k, v] : prov.items()) {
            if (k != "source_file" && k != "config_digest" && k != "extractor" && k != "config") f.provenance_extra[k] = v;
        }
    }
    for (const auto& [k, v] : doc.items()) {
        if (k != "format_version" && k != "origin" && k != "duration" && k != "strokes" && k != "provenance") {
            f.extra[k] = v;
        }
    }
    return f;
}

void write_model(const ModelFile& file, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << model_to_json(file).dump(2) << '\n';
}

ModelFile read_model(const std::filesystem::path& path) {
    auto in = open_in(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    try {
        return model_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_table(std::ostream& out, const Table& table) {
    out << '#';
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "\t" : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw InputError("write_table: row width differs from header");
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << format_double(row[c]);
        out << '\n';
    }
}

Table read_table(std::istream& in, const std::string& name) {
    Table t;
    std::string line;
    std::size_t no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++no;
        if (!header) {
            if (line.empty() || line.front() != '#') fail(name, no, "expected '#' header row");
            std::istringstream hs(line.substr(1));
            std::string col;
            while (std::getline(hs, col, '\t')) t.columns.push_back(col);
            header = true;
            continue;
        }
        if (blank(line)) continue;
        const auto tok = split_ws(line);
        if (tok.size() != t.columns.size()) fail(name, no, "row width differs from header");
        std::vector<double> row(tok.size());
        for (std::size_t k = 0; k < tok.size(); ++k) {
            if (!parse_number(tok[k], row[k])) fail(name, no, "bad number '" + std::string(tok[k]) + "'");
        }
        t.rows.push_back(std::move(row));
    }
    if (!header) fail(name, no, "empty table");
    return t;
}

Table trajectory_table(const Trajectory& observed, const SpeedProfile& observed_speed,
                       const ReconstructedMovement& reconstructed) {
    const auto& rec = reconstructed.trajectory;
    if (observed.size() != rec.size() || observed_speed.size() != observed.size() ||
        reconstructed.speed.size() != rec.size()) {
        throw InputError("trajectory_table: observed and reconstructed grids differ");
    }
    Table t{{"t", "x_obs", "y_obs", "x_rec", "y_rec", "v_obs", "v_rec"}, {}};
    for (std::size_t i = 0; i < observed.size(); ++i) {
        t.rows.push_back({observed.time(i), observed.points[i].x, observed.points[i].y, rec.points[i].x,
                          rec.points[i].y, observed_speed.values[i], reconstructed.speed.values[i]});
    }
    return t;
}

Table det_table(const DetCurve& curve) {
    Table t{{"threshold", "far", "frr"}, {}};
    for (const auto& p : curve.points) t.rows.push_back({p.threshold, p.far, p.frr});
    return t;
}

DetCurve det_from_table(const Table& table) {
    if (table.columns != std::vector<std::string>{"threshold", "far", "frr"}) {
        throw InputError("det_from_table: expected columns threshold, far, frr");
    }
    DetCurve c;
    for (const auto& r : table.rows) c.points.push_back({r[0], r[1], r[2]});
    return c;
}

Table report_table(const ReconstructionReport& r) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {{"snr_t", "snr_v", "nb_log", "snr_t_per_log", "snr_v_per_log", "preprocessed"},
            {{r.snr_t, r.snr_v, static_cast<double>(r.nb_log), r.snr_t_per_log.value_or(nan),
              r.snr_v_per_log.value_or(nan), r.compared_against_preprocessed ? 1.0 : 0.0}}};
}

void write_table(const std::filesystem::path& path, const Table& table) {
    auto out = open_out(path);
    write_table(out, table);
}

Table read_table(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_table(in, path.string());
}

}  // namespace idelog
