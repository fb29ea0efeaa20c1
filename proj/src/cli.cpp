#include "mpbia/cli.hpp"

#include "mpbia/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mpbia::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string observation_file_name(FieldId id) { return "observations_field" + std::to_string(id) + ".csv"; }

std::string dump_json(const ojson& j) { return j.dump(2) + "\n"; }

std::string model_hash(const RunConfig& config) {
    const ojson echo = config_to_json(config);
    return content_hash(echo.at("model").dump() + echo.at("constants").dump());
}

std::string grid_hash(const Axes& axes) { return content_hash(ojson(axes).dump()); }

std::string likelihood_name(LikelihoodScale scale) {
    return scale == LikelihoodScale::Gaussian ? "gaussian" : "unit";
}

std::string require_string(const nlohmann::json& j, const char* key, const char* which) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ProvenanceError(std::string(which) + " run has no '" + key + "' entry");
    }
    return j.at(key).get<std::string>();
}

double require_number(const nlohmann::json& j, const char* key, const char* which) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ProvenanceError(std::string(which) + " run has no numeric '" + key + "' entry");
    }
    return j.at(key).get<double>();
}

FigureRow figure_row(const std::string& label, std::size_t n2, double snr2, const RiigReport& report,
                     double reference) {
    return {label, n2, snr2, report.ig_single, report.ig_multi, report.riig, reference};
}

void write_summary_csv(const fs::path& path, const std::vector<FigureRow>& rows) {
    std::ostringstream s;
    s << "case,n_obs2,snr2,ig_single,ig_multi,riig,reference_riig,difference\n";
    for (const FigureRow& r : rows) {
        s << r.label << ',' << r.n_obs2 << ',' << format_double(r.snr2) << ',' << format_double(r.ig_single) << ','
          << format_double(r.ig_multi) << ',' << format_double(r.riig) << ',' << format_double(r.reference_riig)
          << ',' << format_double(r.riig - r.reference_riig) << '\n';
    }
    write_text(path, s.str());
}

struct AnnotatedCase {
    const char* label;
    std::size_t n_obs2;
    double snr2;
    double reference;
};

/// Observations, posteriors and RIIG reports of the given second-field cases
/// against the configured first field.
std::vector<FigureRow> run_cases(const RunConfig& base, std::span<const AnnotatedCase> cases, const fs::path& dir,
                                 std::ostream& log) {
    const auto model = make_model(base);
    const FieldSpec* first = base.field(1);
    if (first == nullptr) throw ConfigError("fields: field 1 must be configured");
    const FieldObservations obs1 = synthesize_observations(*model, base.truth, 1, first->observations.coordinates(),
                                                           first->observations.snr);
    write_observations_csv((dir / observation_file_name(1)).string(), obs1);
    const std::vector<FieldObservations> single_obs{obs1};
    const PosteriorRun single = cmd_posterior(base, single_obs, dir, "posterior_single", log);

    const FieldSpec* second = base.field(2);
    const ObservationConfig second_base = second ? second->observations : ObservationConfig{};
    std::vector<FigureRow> rows;
    for (const AnnotatedCase& c : cases) {
        ObservationConfig cfg2 = second_base;
        cfg2.count = c.n_obs2;
        cfg2.snr = c.snr2;
        const FieldObservations obs2 = synthesize_observations(*model, base.truth, 2, cfg2.coordinates(), cfg2.snr);
        write_observations_csv((dir / ("observations_field2_" + std::string(c.label) + ".csv")).string(), obs2);
        const std::vector<FieldObservations> multi_obs{obs1, obs2};
        const PosteriorRun multi = cmd_posterior(base, multi_obs, dir, "posterior_" + std::string(c.label), log);
        const RiigReport report = compare_runs(nlohmann::json(single.sidecar), nlohmann::json(multi.sidecar));
        write_text(dir / ("riig_" + std::string(c.label) + ".json"), dump_json(report.json));
        rows.push_back(figure_row(c.label, c.n_obs2, c.snr2, report, c.reference));
    }
    return rows;
}

}  // namespace

void apply_overrides(RunConfig& config, const Overrides& overrides) {
    if (overrides.out_dir) config.output_dir = *overrides.out_dir;
    if (overrides.workers) config.workers = *overrides.workers;
    if (overrides.grid) config.grid = *overrides.grid;
    config.validate();
}

std::vector<FieldId> parse_field_list(const std::string& text) {
    std::vector<FieldId> ids;
    if (text.empty() || text == "none") return ids;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        FieldId id = 0;
        const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), id);
        if (item.empty() || ec != std::errc{} || end != item.data() + item.size() || id < 1) {
            throw ConfigError("--fields: expected a comma-separated list of field ids, got '" + text + "'");
        }
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
            throw ConfigError("--fields: field " + item + " listed twice");
        }
        ids.push_back(id);
        pos = comma + 1;
    }
    return ids;
}

std::vector<std::size_t> parse_grid(const std::string& text, std::size_t dimension) {
    std::vector<std::size_t> counts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        std::size_t n = 0;
        const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
        if (item.empty() || ec != std::errc{} || end != item.data() + item.size() || n < 2) {
            throw ConfigError("--grid: expected N or N,N with N >= 2, got '" + text + "'");
        }
        counts.push_back(n);
        pos = comma + 1;
    }
    if (counts.size() == 1) counts.assign(dimension, counts.front());
    if (counts.size() != dimension) {
        throw ConfigError("--grid: expected " + std::to_string(dimension) + " counts, got '" + text + "'");
    }
    return counts;
}

std::vector<FieldObservations> synthesize_fields(const RunConfig& config, const ForwardModel& model) {
    std::vector<FieldSpec> fields = config.fields;
    std::sort(fields.begin(), fields.end(), [](const FieldSpec& a, const FieldSpec& b) { return a.id < b.id; });
    std::vector<FieldObservations> out;
    for (const FieldSpec& f : fields) {
        out.push_back(synthesize_observations(model, config.truth, f.id, f.observations.coordinates(),
                                              f.observations.snr));
    }
    return out;
}

std::vector<fs::path> cmd_synthesize(const RunConfig& config, const fs::path& out_dir) {
    const auto model = make_model(config);
    ensure_directory(out_dir);
    std::vector<fs::path> written;
    for (const FieldObservations& obs : synthesize_fields(config, *model)) {
        const fs::path path = out_dir / observation_file_name(obs.field_id);
        write_observations_csv(path.string(), obs);
        written.push_back(path);
    }
    return written;
}

FieldObservations load_observations(const std::string& path, const ForwardModel& model) {
    FieldObservations obs = read_observations_csv(path, 1);
    if (obs.count() == 0) return obs;
    if (obs.field_id < 1 || static_cast<std::size_t>(obs.field_id) > model.field_count()) {
        throw ConfigError("'" + path + "': field " + std::to_string(obs.field_id) + " is not a field of model " +
                          model.name());
    }
    const std::size_t dim = model.output_dim(obs.field_id);
    return dim == 1 ? obs : read_observations_csv(path, dim);
}

std::vector<FieldObservations> select_fields(std::span<const FieldObservations> available,
                                             std::span<const FieldId> fields) {
    std::vector<FieldObservations> out;
    for (FieldId id : fields) {
        const auto it = std::find_if(available.begin(), available.end(),
                                     [id](const FieldObservations& o) { return o.field_id == id; });
        if (it == available.end()) {
            throw ConfigError("--fields: no observations available for field " + std::to_string(id));
        }
        out.push_back(*it);
    }
    return out;
}

PosteriorRun run_posterior(const RunConfig& config, const ForwardModel& model,
                           std::span<const FieldObservations> observations) {
    config.validate();
    for (const FieldObservations& obs : observations) obs.validate();
    const Axes axes = cdf_spaced_grid(config.prior, config.grid);

    PosteriorRun run;
    run.posterior =
        evaluate_posterior(config.prior, grid_log_likelihood(model, axes, observations, config.likelihood, config.workers),
                           axes);
    run.information_gain = information_gain(run.posterior, config.prior);

    ojson j;
    j["tool"] = kToolName;
    j["tool_version"] = kToolVersion;
    j["model"] = config.model;
    j["parameter_names"] = config.parameter_names();
    j["likelihood"] = likelihood_name(config.likelihood);
    ojson fields = ojson::array();
    ojson hashes = ojson::object();
    for (const FieldObservations& obs : observations) {
        fields.push_back(obs.field_id);
        hashes[std::to_string(obs.field_id)] = observations_hash(obs);
    }
    j["fields"] = fields;
    j["model_hash"] = model_hash(config);
    j["prior_hash"] = prior_hash(config.prior);
    j["grid_hash"] = grid_hash(axes);
    j["observation_hashes"] = hashes;
    const ojson summary = posterior_json(run.posterior, run.information_gain);
    for (const auto& [key, value] : summary.items()) j[key] = value;
    j["config"] = config_to_json(config);
    run.sidecar = std::move(j);
    return run;
}

PosteriorRun cmd_posterior(const RunConfig& config, std::span<const FieldObservations> observations,
                           const fs::path& out_dir, const std::string& stem, std::ostream& log) {
    const auto model = make_model(config);
    PosteriorRun run = run_posterior(config, *model, observations);
    for (const std::string& w : run.posterior.warnings) log << "warning: " << stem << ": " << w << '\n';
    ensure_directory(out_dir);
    std::ostringstream csv;
    write_posterior_csv(csv, run.posterior, config.parameter_names());
    write_text(out_dir / (stem + ".csv"), csv.str());
    write_text(out_dir / (stem + ".json"), dump_json(run.sidecar));
    return run;
}

RiigReport compare_runs(const nlohmann::json& single, const nlohmann::json& multi) {
    for (const char* key : {"model_hash", "prior_hash", "grid_hash", "likelihood"}) {
        if (require_string(single, key, "single") != require_string(multi, key, "multi")) {
            throw ProvenanceError(std::string("runs are not comparable: ") + key + " differs");
        }
    }
    if (!single.contains("observation_hashes") || !multi.contains("observation_hashes")) {
        throw ProvenanceError("runs are not comparable: missing observation hashes");
    }
    const nlohmann::json& hs = single.at("observation_hashes");
    const nlohmann::json& hm = multi.at("observation_hashes");
    if (hs.empty()) throw ProvenanceError("single run used no observations");
    for (const auto& [field, hash] : hs.items()) {
        if (!hm.contains(field)) {
            throw ProvenanceError("runs are not comparable: multi run lacks field " + field + " observations");
        }
        if (hm.at(field) != hash) {
            throw ProvenanceError("runs are not comparable: field " + field + " observations differ");
        }
    }

    RiigReport report;
    report.ig_single = require_number(single, "information_gain", "single");
    report.ig_multi = require_number(multi, "information_gain", "multi");
    report.riig = riig(report.ig_single, report.ig_multi);
    ojson j;
    j["tool"] = kToolName;
    j["tool_version"] = kToolVersion;
    j["ig_single"] = report.ig_single;
    j["ig_multi"] = report.ig_multi;
    j["riig"] = report.riig;
    j["prior_hash"] = single.at("prior_hash");
    j["single_observation_hashes"] = hs;
    j["multi_observation_hashes"] = hm;
    report.json = std::move(j);
    return report;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

std::vector<SweepResult> cmd_sweep(const RunConfig& config, bool full, const fs::path& out_dir, std::ostream& log) {
    const auto model = make_model(config);
    const SweepSpec spec = make_sweep_spec(config, full);
    ensure_directory(out_dir);

    const auto start = std::chrono::steady_clock::now();
    const std::vector<SweepResult> results = run_riig_sweep(*model, spec, [&](std::size_t done, std::size_t total) {
        log << "sweep: row " << done << '/' << total << " done\n" << std::flush;
    });
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ostringstream csv;
    export_sweep_csv(csv, results);
    write_text(out_dir / "sweep.csv", csv.str());

    std::size_t failed = 0;
    double min_ig = std::numeric_limits<double>::infinity();
    for (const SweepResult& r : results) {
        if (!r.ok()) {
            ++failed;
            log << "warning: cell (" << r.n_obs2 << ", " << format_double(r.snr2) << ") " << r.status << '\n';
            continue;
        }
        min_ig = std::min(min_ig, r.ig_multi);
        if (r.ig_multi < 0.0) {
            log << "note: cell (" << r.n_obs2 << ", " << format_double(r.snr2)
                << ") has a negative information gain " << format_double(r.ig_multi)
                << " (quadrature artifact)\n";
        }
    }

    const FieldObservations obs1 = synthesize_observations(*model, spec.x_true, 1, spec.first_field.coordinates(),
                                                           spec.first_field.snr);
    ojson manifest;
    manifest["tool"] = kToolName;
    manifest["tool_version"] = kToolVersion;
    manifest["resolution"] = full ? "full" : "desk";
    manifest["config"] = config_to_json(config);
    manifest["n_obs2_axis"] = spec.n_obs2_axis;
    ojson snr_axis = ojson::array();
    for (double s : spec.snr2_axis) snr_axis.push_back(format_double(s));
    manifest["snr2_axis"] = snr_axis;
    manifest["cells"] = results.size();
    manifest["failed_cells"] = failed;
    manifest["ig_single"] = results.front().ig_single;
    manifest["min_ig_multi"] = std::isfinite(min_ig) ? ojson(min_ig) : ojson(nullptr);
    manifest["model_hash"] = model_hash(config);
    manifest["prior_hash"] = prior_hash(spec.prior);
    manifest["first_field_observation_hash"] = observations_hash(obs1);
    manifest["sweep_csv_hash"] = content_hash(csv.str());
    write_text(out_dir / "manifest.json", dump_json(manifest));

    ojson timing;
    timing["elapsed_seconds"] = elapsed;
    timing["workers"] = spec.workers;
    write_text(out_dir / "timing.json", dump_json(timing));
    log << "sweep: " << results.size() << " cells in " << std::fixed << std::setprecision(2) << elapsed << " s\n"
        << std::defaultfloat;
    return results;
}

std::vector<FigureRow> cmd_reproduce(const std::string& figure, const RunConfig& config, bool full,
                                     const fs::path& out_dir, std::ostream& log) {
    const fs::path dir = out_dir / figure;
    ensure_directory(dir);
    std::vector<FigureRow> rows;
    if (figure == "fig9") {
        static constexpr AnnotatedCase kCases[] = {{"middle", 2, 1.2e4, 1.23}, {"right", 256, 80.0, 1.22}};
        rows = run_cases(config, kCases, dir, log);
    } else if (figure == "fig10") {
        static constexpr AnnotatedCase kCases[] = {
            {"p1", 2, 1.2e4, 1.23}, {"p2", 256, 80.0, 1.22}, {"p3", 256, 1.2e4, 3.65}};
        rows = run_cases(config, kCases, dir, log);
        (void)cmd_sweep(config, full, dir, log);
    } else {
        throw ConfigError("unknown figure '" + figure + "' (expected fig9 or fig10)");
    }
    write_summary_csv(dir / "summary.csv", rows);
    return rows;
}

void print_summary(std::ostream& out, const std::vector<FigureRow>& rows) {
    const auto flags = out.flags();
    out << std::left << std::setw(8) << "case" << std::right << std::setw(8) << "n_obs2" << std::setw(10) << "snr2"
        << std::setw(11) << "ig_single" << std::setw(10) << "ig_multi" << std::setw(8) << "riig" << std::setw(11)
        << "reference" << '\n';
    for (const FigureRow& r : rows) {
        out << std::left << std::setw(8) << r.label << std::right << std::setw(8) << r.n_obs2 << std::setw(10)
            << std::defaultfloat << std::setprecision(5) << r.snr2 << std::fixed << std::setprecision(4)
            << std::setw(11) << r.ig_single << std::setw(10) << r.ig_multi << std::setw(8) << std::setprecision(3)
            << r.riig << std::setw(11) << std::setprecision(2) << r.reference_riig << '\n';
    }
    out.flags(flags);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-physics-enhanced Bayesian inverse analysis on parameter grids", kToolName};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    int workers = 0;
    std::string grid_text;
    std::string fields_text;
    bool full = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--grid", grid_text, "Grid points per parameter: N or N,N");
    CLI::Option* fields_opt =
        app.add_option("--fields", fields_text, "Comma-separated field ids to condition on (empty or 'none' for the prior)")
            ->expected(0, 1);
    app.add_flag("--full", full, "Use the full-resolution sweep axes");
    app.add_flag("--seedless", "Accepted for scripts; noise is a deterministic Sobol sequence with no seed");

    CLI::App* synth = app.add_subcommand("synthesize", "Write synthetic observation CSVs for every configured field");
    CLI::App* post = app.add_subcommand("posterior", "Evaluate a grid posterior and its information gain");
    std::vector<std::string> obs_files;
    std::string stem = "posterior";
    post->add_option("--obs", obs_files, "Observation CSV files (default: synthesize from the config)")
        ->check(CLI::ExistingFile);
    post->add_option("--name", stem, "Output file stem");
    CLI::App* riig_cmd = app.add_subcommand("riig", "Relative increase in information gain of two posterior runs");
    std::string single_path;
    std::string multi_path;
    riig_cmd->add_option("single", single_path, "Single-physics posterior JSON")->required()->check(CLI::ExistingFile);
    riig_cmd->add_option("multi", multi_path, "Multi-physics posterior JSON")->required()->check(CLI::ExistingFile);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "RIIG sweep over second-field count and SNR");
    CLI::App* repro = app.add_subcommand("reproduce", "Regenerate the artifacts of a figure");
    std::string figure;
    repro->add_option("figure", figure, "fig9 or fig10")->required()->check(CLI::IsMember({"fig9", "fig10"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        RunConfig config = config_path.empty() ? default_config() : load_config(config_path);
        Overrides overrides;
        if (!out_dir.empty()) overrides.out_dir = out_dir;
        if (workers > 0) overrides.workers = workers;
        if (!grid_text.empty()) overrides.grid = parse_grid(grid_text, config.prior.dimension());
        apply_overrides(config, overrides);
        const fs::path out_path = config.output_dir;

        if (synth->parsed()) {
            for (const fs::path& p : cmd_synthesize(config, out_path)) out << p.string() << '\n';
        } else if (post->parsed()) {
            const auto model = make_model(config);
            std::vector<FieldObservations> available;
            if (obs_files.empty()) {
                available = synthesize_fields(config, *model);
            } else {
                for (const std::string& path : obs_files) {
                    FieldObservations obs = load_observations(path, *model);
                    if (obs.count() == 0) continue;
                    for (const FieldObservations& a : available) {
                        if (a.field_id == obs.field_id) {
                            throw ConfigError("--obs: two files provide field " + std::to_string(obs.field_id));
                        }
                    }
                    available.push_back(std::move(obs));
                }
            }
            std::vector<FieldId> ids;
            if (fields_opt->count() > 0) {
                ids = parse_field_list(fields_text);
            } else {
                for (const FieldObservations& a : available) ids.push_back(a.field_id);
            }
            const std::vector<FieldObservations> selected = select_fields(available, ids);
            const PosteriorRun result = cmd_posterior(config, selected, out_path, stem, err);
            out << "information_gain " << format_double(result.information_gain) << '\n';
            out << (out_path / (stem + ".json")).string() << '\n';
        } else if (riig_cmd->parsed()) {
            const RiigReport report = compare_runs(read_json(single_path), read_json(multi_path));
            ensure_directory(out_path);
            write_text(out_path / "riig.json", dump_json(report.json));
            out << "ig_single " << format_double(report.ig_single) << '\n'
                << "ig_multi " << format_double(report.ig_multi) << '\n'
                << "riig " << format_double(report.riig) << '\n';
        } else if (sweep_cmd->parsed()) {
            const std::vector<SweepResult> results = cmd_sweep(config, full, out_path, err);
            out << (out_path / "sweep.csv").string() << " (" << results.size() << " cells)\n";
        } else if (repro->parsed()) {
            const std::vector<FigureRow> rows = cmd_reproduce(figure, config, full, out_path, err);
            print_summary(out, rows);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ProvenanceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitSuccess;
}

}  // namespace mpbia::cli
