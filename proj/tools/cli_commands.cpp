#include "cli_commands.hpp"

#include "idelog/io.hpp"
#include "idelog/pipeline.hpp"
#include "idelog/synthetic.hpp"
#include "idelog/verification.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace idelog::cli {
namespace {

bool ends_with(const fs::path& p, std::string_view suffix) { return p.filename().string().ends_with(suffix); }

// Generator ground truth and emitted configs sit next to models but are not inputs.
bool is_model_file(const fs::path& p) {
    return p.extension() == ".json" && p.filename() != "config.json" && !ends_with(p, ".truth.json");
}

bool is_signature_file(const fs::path& p) { return p.extension() != ".json" && p.extension() != ".tsv"; }

// Regular files under each input, directories walked recursively, sorted.
std::vector<fs::path> collect_files(const std::vector<std::string>& inputs, bool models) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::recursive_directory_iterator(p)) {
                if (e.is_regular_file() && (models ? is_model_file(e.path()) : is_signature_file(e.path()))) {
                    found.push_back(e.path());
                }
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else {
            throw InputError("no such file or directory: " + in);
        }
    }
    return files;
}

// Output name for an input file: its path relative to the directory it was
// found under (so writer subdirectories survive), extension and any ".model"
// dropped.
fs::path output_stem(const fs::path& file, const std::vector<std::string>& inputs) {
    fs::path stem = file.filename();
    for (const auto& in : inputs) {
        const fs::path root(in);
        if (fs::is_directory(root)) {
            auto rel = fs::relative(file, root);
            if (!rel.empty() && *rel.begin() != "..") {
                stem = rel;
                break;
            }
        }
    }
    stem.replace_extension();
    if (stem.extension() == ".model") stem.replace_extension();
    return stem;
}

fs::path output_path(const fs::path& dir, const fs::path& stem, const std::string& suffix) {
    fs::path p = dir / stem;
    p += suffix;
    fs::create_directories(p.parent_path());
    return p;
}

std::string tsv_row(const std::string& name, const std::vector<double>& values) {
    std::string s = name;
    for (double v : values) s += "\t" + format_double(v);
    return s + "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

struct Stats {
    double mean = 0.0;
    double std = 0.0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return {std::nan(""), std::nan("")};
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = v.size() > 1 ? std::sqrt(s.std / static_cast<double>(v.size() - 1)) : 0.0;
    return s;
}

// Shared pipeline flags.
struct PipelineFlags {
    std::string config_file;
    std::string extractor;
    std::string smooth;
    std::optional<double> eta;
    std::optional<int> passes;
    std::optional<double> rate;

    void add(CLI::App& app, bool with_extractor) {
        app.add_option("--config", config_file, "JSON pipeline configuration")->check(CLI::ExistingFile);
        if (with_extractor) app.add_option("--extractor", extractor, "idelog or xzero")->check(CLI::IsMember({"idelog", "xzero"}));
        app.add_option("--smooth", smooth, "on or off")->check(CLI::IsMember({"on", "off"}));
        app.add_option("--eta", eta, "refinement step factor");
        app.add_option("--passes", passes, "refinement passes");
        app.add_option("--rate", rate, "resampling rate in Hz");
    }

    PipelineConfig resolve() const {
        PipelineConfig c;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw InputError(config_file + ": " + e.what());
            }
            c = PipelineConfig::from_json(doc);
        }
        if (!extractor.empty()) c.extractor = extractor_from_string(extractor);
        if (!smooth.empty()) c.smooth.enabled = smooth == "on";
        if (eta) c.refine.eta = *eta;
        if (passes) c.refine.passes = *passes;
        if (rate) c.rate = *rate;
        c.validate();
        return c;
    }
};

void write_config(const fs::path& dir, const PipelineConfig& cfg) {
    write_text(dir / "config.json", cfg.to_json().dump(2) + "\n");
}

ModelFile model_file(const DecompositionResult& r, const std::string& source, const PipelineConfig& cfg) {
    ModelFile f;
    f.model = r.model;
    f.source_file = source;
    f.config_digest = r.config_digest;
    f.extractor = to_string(r.extractor);
    f.config = cfg.to_json();
    return f;
}

const char* kReportHeader = "#file\tsnr_t\tsnr_v\tnb_log\tsnr_t_per_log\tsnr_v_per_log\tsnr_t_initial\n";

std::vector<double> report_values(const DecompositionResult& r) {
    const double nan = std::nan("");
    return {r.report.snr_t, r.report.snr_v, static_cast<double>(r.report.nb_log),
            r.report.snr_t_per_log.value_or(nan), r.report.snr_v_per_log.value_or(nan), r.initial_report.snr_t};
}

std::string aggregate_table(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& names) {
    std::string text = "#metric\tmean\tstd\tcount\n";
    for (std::size_t c = 0; c < names.size(); ++c) {
        std::vector<double> col;
        for (const auto& r : rows) col.push_back(r[c]);
        const auto s = stats(col);
        text += tsv_row(names[c], {s.mean, s.std, static_cast<double>(col.size())});
    }
    return text;
}

int worst(int a, int b) { return std::max(a, b); }

int cmd_decompose(const std::vector<std::string>& inputs, const fs::path& out_dir, const PipelineConfig& cfg,
                  bool plots, unsigned threads, std::ostream& out, std::ostream& err) {
    if (inputs.empty()) {
        err << "decompose: no input given\n";
        return kUsage;
    }
    const auto files = collect_files(inputs, false);
    fs::create_directories(out_dir);
    write_config(out_dir, cfg);

    std::vector<RawSignature> corpus(files.size());
    std::vector<std::string> read_errors(files.size());
    int status = kOk;
    for (std::size_t i = 0; i < files.size(); ++i) {
        try {
            corpus[i] = read_signature(files[i]);
        } catch (const Error& e) {
            read_errors[i] = e.what();
        }
    }
    const auto results = decompose_corpus(corpus, cfg, threads);

    std::string table = kReportHeader;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto stem = output_stem(files[i], inputs);
        if (!read_errors[i].empty()) {
            err << "error: " << read_errors[i] << "\n";
            status = worst(status, kInput);
            continue;
        }
        if (!results[i].ok()) {
            err << "error: " << files[i].generic_string() << ": " << results[i].error() << "\n";
            status = worst(status, results[i].error_kind);
            continue;
        }
        const auto& r = results[i].result();
        write_model(model_file(r, files[i].generic_string(), cfg), output_path(out_dir, stem, ".model.json"));
        write_table(output_path(out_dir, stem, ".report.tsv"), report_table(r.report));
        if (plots) {
            write_table(output_path(out_dir, stem, ".trajectory.tsv"),
                        trajectory_table(r.observed, r.observed_speed, r.reconstruction));
        }
        rows.push_back(report_values(r));
        table += tsv_row(stem.generic_string(), rows.back());
    }
    write_text(out_dir / "decompositions.tsv", table);
    write_text(out_dir / "aggregate.tsv",
               aggregate_table(rows, {"snr_t", "snr_v", "nb_log", "snr_t_per_log", "snr_v_per_log", "snr_t_initial"}));
    out << "decomposed " << rows.size() << " of " << files.size() << " signatures into " << out_dir.generic_string()
        << "\n";
    return status;
}

int cmd_synthesize(const std::vector<std::string>& models, const fs::path& out_dir, std::optional<std::size_t> count,
                   std::uint64_t seed, std::size_t writers, std::size_t per_writer, double rate, std::ostream& out) {
    fs::create_directories(out_dir);
    GeneratorConfig g;
    g.rate = rate;
    std::size_t written = 0;
    auto emit = [&](const SyntheticSignature& s, const fs::path& stem) {
        fs::create_directories(stem.parent_path());
        write_signature(fs::path(stem.string() + ".txt"), s.raw);
        ModelFile truth;
        truth.model = s.model;
        truth.extractor = "generator";
        truth.config = {{"seed", seed}, {"rate", rate}};
        truth.config_digest = fnv1a_hex(truth.config.dump());
        write_model(truth, fs::path(stem.string() + ".truth.json"));
        ++written;
    };
    auto name = [](const char* prefix, std::size_t i) {
        std::ostringstream s;
        s << prefix << std::setw(3) << std::setfill('0') << i;
        return s.str();
    };

    if (!models.empty()) {
        for (const auto& m : collect_files(models, true)) {
            const auto file = read_model(m);
            auto sig = render(file.model, rate, m.generic_string());
            write_signature(output_path(out_dir, output_stem(m, models), ".txt"), sig.raw);
            ++written;
        }
    } else if (writers > 0) {
        const auto corpus = generate_writers(seed, writers, per_writer, g);
        for (std::size_t w = 0; w < corpus.size(); ++w) {
            for (std::size_t s = 0; s < corpus[w].size(); ++s) emit(corpus[w][s], out_dir / name("w", w) / name("s", s));
        }
    } else {
        const auto corpus = generate_corpus(seed, count.value_or(50), g);
        for (std::size_t i = 0; i < corpus.size(); ++i) emit(corpus[i], out_dir / name("synthetic_", i));
    }
    out << "wrote " << written << " signatures to " << out_dir.generic_string() << "\n";
    return kOk;
}

int cmd_reconstruct(const std::vector<std::string>& models, const fs::path& out_dir, const std::string& observed,
                    double rate, std::ostream& out) {
    const auto files = collect_files(models, true);
    if (files.empty()) throw InputError("reconstruct: no model files given");
    if (!observed.empty() && files.size() != 1) throw InputError("reconstruct: --observed needs exactly one model");
    fs::create_directories(out_dir);
    for (const auto& m : files) {
        const auto file = read_model(m);
        const auto stem = output_stem(m, models);
        if (observed.empty()) {
            write_signature(output_path(out_dir, stem, ".txt"), render(file.model, rate, m.generic_string()).raw);
            continue;
        }
        // Observed signature given: reconstruct on its grid and report.
        const auto traj = resample(read_signature(observed), rate).trajectory;
        const auto speed = speed_profile(traj);
        const auto rec = synthesize_trajectory(file.model, traj.grid());
        const auto report = make_report(file.model, traj, speed, rec, false);
        write_table(output_path(out_dir, stem, ".report.tsv"), report_table(report));
        write_table(output_path(out_dir, stem, ".trajectory.tsv"), trajectory_table(traj, speed, rec));
        RawSignature sig;
        for (std::size_t i = 0; i < rec.trajectory.size(); ++i) {
            sig.samples.push_back({rec.trajectory.time(i), rec.trajectory.points[i].x, rec.trajectory.points[i].y, 1.0, true});
        }
        write_signature(output_path(out_dir, stem, ".txt"), sig);
    }
    out << "reconstructed " << files.size() << " models into " << out_dir.generic_string() << "\n";
    return kOk;
}

// One subdirectory per writer; signature files, or .json models rendered at `rate`.
std::vector<WriterSet> load_writers(const fs::path& root, double rate, ChannelMask mask, std::size_t decimation) {
    if (!fs::is_directory(root)) throw InputError("not a corpus directory: " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<WriterSet> writers;
    for (const auto& d : dirs) {
        WriterSet w;
        w.id = d.filename().string();
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(d)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        // A writer directory holds either signatures or models; models win when both exist.
        const bool models = std::any_of(files.begin(), files.end(), is_model_file);
        for (const auto& f : files) {
            if (!(models ? is_model_file(f) : is_signature_file(f))) continue;
            Trajectory traj = models ? render(read_model(f).model, rate).trajectory
                                     : resample(read_signature(f), rate).trajectory;
            w.signatures.push_back(extract_features(traj, mask, decimation));
        }
        writers.push_back(std::move(w));
    }
    if (writers.empty()) throw InputError("corpus has no writer directories: " + root.string());
    return writers;
}

int cmd_evaluate(const fs::path& original, const fs::path& reconstructed, const fs::path& out_dir, double rate,
                 std::size_t decimation, bool velocity_only, unsigned threads, std::ostream& out, std::ostream& err) {
    const ChannelMask mask = velocity_only ? ChannelMask::velocity_only() : ChannelMask{};
    const auto a = load_writers(original, rate, mask, decimation);
    const auto b = load_writers(reconstructed, rate, mask, decimation);
    if (a.size() != b.size()) throw InputError("corpora differ in writer count");
    for (std::size_t w = 0; w < a.size(); ++w) {
        if (a[w].id != b[w].id || a[w].signatures.size() != b[w].signatures.size()) {
            throw InputError("corpora differ for writer " + a[w].id);
        }
    }
    ProtocolConfig pc;
    pc.threads = threads;
    const auto sa = evaluate_protocol(a, dtw_distance, pc);
    const auto sb = evaluate_protocol(b, dtw_distance, pc);
    for (const auto& id : sa.skipped_writers) err << "warning: writer " << id << " has fewer than 6 signatures; skipped\n";
    const auto da = det_and_eer(sa);
    const auto db = det_and_eer(sb);
    const double gap = det_area_gap(da.curve, db.curve);

    fs::create_directories(out_dir);
    write_table(out_dir / "det_original.tsv", det_table(da.curve));
    write_table(out_dir / "det_reconstructed.tsv", det_table(db.curve));
    std::string scores = "#corpus\tkind\tscore\n";
    for (auto [name, set] : {std::pair{"original", &sa}, std::pair{"reconstructed", &sb}}) {
        for (double s : set->genuine) scores += std::string(name) + "\tgenuine\t" + format_double(s) + "\n";
        for (double s : set->impostor) scores += std::string(name) + "\timpostor\t" + format_double(s) + "\n";
    }
    write_text(out_dir / "scores.tsv", scores);
    write_table(out_dir / "summary.tsv", Table{{"eer_original", "eer_reconstructed", "det_area_gap"}, {{da.eer, db.eer, gap}}});
    out << "EER original " << format_double(da.eer) << ", reconstructed " << format_double(db.eer) << ", DET area gap "
        << format_double(gap) << "\n";
    return kOk;
}

int cmd_compare(const std::vector<std::string>& inputs, const fs::path& out_dir, PipelineConfig cfg, unsigned threads,
                std::ostream& out, std::ostream& err) {
    if (inputs.empty()) {
        err << "compare: no input given\n";
        return kUsage;
    }
    const auto files = collect_files(inputs, false);
    std::vector<RawSignature> corpus;
    for (const auto& f : files) corpus.push_back(read_signature(f));
    cfg.extractor = Extractor::idelog;
    const auto ri = decompose_corpus(corpus, cfg, threads);
    cfg.extractor = Extractor::xzero;
    const auto rx = decompose_corpus(corpus, cfg, threads);

    fs::create_directories(out_dir);
    int status = kOk;
    std::string table = "#file\tidelog_snr_t\tidelog_snr_v\tidelog_nb_log\txzero_snr_t\txzero_snr_v\txzero_nb_log\n";
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!ri[i].ok() || !rx[i].ok()) {
            const auto& bad = !ri[i].ok() ? ri[i] : rx[i];
            err << "error: " << files[i].generic_string() << ": " << bad.error() << "\n";
            status = worst(status, bad.error_kind);
            continue;
        }
        const auto& a = ri[i].result().report;
        const auto& b = rx[i].result().report;
        rows.push_back({a.snr_t, a.snr_v, static_cast<double>(a.nb_log), b.snr_t, b.snr_v, static_cast<double>(b.nb_log)});
        table += tsv_row(output_stem(files[i], inputs).generic_string(), rows.back());
    }
    write_text(out_dir / "comparison.tsv", table);
    write_text(out_dir / "aggregate.tsv",
               aggregate_table(rows, {"idelog_snr_t", "idelog_snr_v", "idelog_nb_log", "xzero_snr_t", "xzero_snr_v",
                                      "xzero_nb_log"}));
    out << "compared " << rows.size() << " of " << files.size() << " signatures\n";
    return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sigma-Lognormal decomposition of handwriting trajectories"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0: all cores)");

    auto* dec = app.add_subcommand("decompose", "extract models from signature files or corpus directories");
    std::vector<std::string> dec_inputs;
    std::string dec_out = "out";
    bool dec_plots = false;
    PipelineFlags dec_flags;
    dec->add_option("inputs", dec_inputs, "signature files or directories");
    dec->add_option("--out", dec_out, "output directory");
    dec->add_flag("--plots", dec_plots, "also write observed/reconstructed trajectory tables");
    dec_flags.add(*dec, true);

    auto* syn = app.add_subcommand("synthesize", "render models, or generate a seeded synthetic corpus");
    std::vector<std::string> syn_models;
    std::string syn_out = "synthetic";
    std::optional<std::size_t> syn_count;
    std::uint64_t syn_seed = 1;
    std::size_t syn_writers = 0, syn_per_writer = 20;
    double syn_rate = 200.0;
    syn->add_option("models", syn_models, "model files to render (omit to use the generator)");
    syn->add_option("--out", syn_out, "output directory");
    syn->add_option("--count", syn_count, "number of generated signatures")->check(CLI::PositiveNumber);
    syn->add_option("--seed", syn_seed, "generator seed");
    syn->add_option("--writers", syn_writers, "generate a per-writer corpus with this many writers");
    syn->add_option("--per-writer", syn_per_writer, "signatures per writer")->check(CLI::PositiveNumber);
    syn->add_option("--rate", syn_rate, "sampling rate in Hz")->check(CLI::PositiveNumber);

    auto* rec = app.add_subcommand("reconstruct", "render models back to trajectories, optionally against an observation");
    std::vector<std::string> rec_models;
    std::string rec_out = "reconstructed", rec_observed;
    double rec_rate = 200.0;
    rec->add_option("models", rec_models, "model files or directories")->required();
    rec->add_option("--out", rec_out, "output directory");
    rec->add_option("--observed", rec_observed, "observed signature for report and plot data")->check(CLI::ExistingFile);
    rec->add_option("--rate", rec_rate, "sampling rate in Hz")->check(CLI::PositiveNumber);

    auto* ev = app.add_subcommand("evaluate", "verification protocol on an original and a reconstructed corpus");
    std::string ev_original, ev_reconstructed, ev_out = "evaluation";
    double ev_rate = 200.0;
    std::size_t ev_decimation = 4;
    bool ev_velocity = false;
    ev->add_option("original", ev_original, "corpus directory, one subdirectory per writer")->required();
    ev->add_option("reconstructed", ev_reconstructed, "corpus directory with the same layout")->required();
    ev->add_option("--out", ev_out, "output directory");
    ev->add_option("--rate", ev_rate, "resampling rate in Hz")->check(CLI::PositiveNumber);
    ev->add_option("--decimation", ev_decimation, "keep every n-th feature sample")->check(CLI::PositiveNumber);
    ev->add_flag("--velocity-only", ev_velocity, "use the speed channel only");

    auto* cmp = app.add_subcommand("compare", "run both extractors and tabulate their SNRs");
    std::vector<std::string> cmp_inputs;
    std::string cmp_out = "comparison";
    PipelineFlags cmp_flags;
    cmp->add_option("inputs", cmp_inputs, "signature files or directories");
    cmp->add_option("--out", cmp_out, "output directory");
    cmp_flags.add(*cmp, false);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << "run with --help for usage\n";
        return kUsage;
    }

    try {
        if (*dec) return cmd_decompose(dec_inputs, dec_out, dec_flags.resolve(), dec_plots, threads, out, err);
        if (*syn) {
            return cmd_synthesize(syn_models, syn_out, syn_count, syn_seed, syn_writers, syn_per_writer, syn_rate, out);
        }
        if (*rec) return cmd_reconstruct(rec_models, rec_out, rec_observed, rec_rate, out);
        if (*ev) {
            return cmd_evaluate(ev_original, ev_reconstructed, ev_out, ev_rate, ev_decimation, ev_velocity, threads, out,
                                err);
        }
        if (*cmp) return cmd_compare(cmp_inputs, cmp_out, cmp_flags.resolve(), threads, out, err);
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInput;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInput;
    }
    return kUsage;
}

}  // namespace idelog::cli
