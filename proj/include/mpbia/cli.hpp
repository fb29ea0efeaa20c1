#pragma once

// Command layer behind the `mpbia` executable. Each command is a plain function
// so tests can drive it without spawning processes; `run` adds argument
// parsing and maps exceptions to exit codes.

#include "mpbia/config.hpp"
#include "mpbia/inference.hpp"
#include "mpbia/probabilistic.hpp"
#include "mpbia/sweep.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mpbia::cli {

inline constexpr const char* kToolName = "mpbia";
inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Overrides applied on top of a loaded configuration.
struct Overrides {
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    std::optional<std::vector<std::size_t>> grid;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

/// "1,2" -> {1, 2}; "" and "none" -> {}. Throws ConfigError on malformed lists.
[[nodiscard]] std::vector<FieldId> parse_field_list(const std::string& text);
/// "100" or "100,80"; a single value applies to every parameter.
[[nodiscard]] std::vector<std::size_t> parse_grid(const std::string& text, std::size_t dimension);

/// Synthetic observations for every configured field, ordered by field id.
[[nodiscard]] std::vector<FieldObservations> synthesize_fields(const RunConfig& config, const ForwardModel& model);

/// Writes observations_field<id>.csv per configured field; returns the paths.
std::vector<std::filesystem::path> cmd_synthesize(const RunConfig& config, const std::filesystem::path& out_dir);

/// Reads an observation CSV, grouping components by the model's output size.
[[nodiscard]] FieldObservations load_observations(const std::string& path, const ForwardModel& model);

struct PosteriorRun {
    PosteriorGrid posterior;
    double information_gain = 0.0;
    /// JSON sidecar including provenance hashes.
    nlohmann::ordered_json sidecar;
};

/// Grid posterior of `config` given `observations` (the data actually used).
[[nodiscard]] PosteriorRun run_posterior(const RunConfig& config, const ForwardModel& model,
                                         std::span<const FieldObservations> observations);

/// Picks the observation sets of `fields` out of `available`. Throws
/// ConfigError for a field that is not available.
[[nodiscard]] std::vector<FieldObservations> select_fields(std::span<const FieldObservations> available,
                                                           std::span<const FieldId> fields);

/// run_posterior plus `<stem>.csv` and `<stem>.json` in `out_dir`; warnings go to `log`.
PosteriorRun cmd_posterior(const RunConfig& config, std::span<const FieldObservations> observations,
                           const std::filesystem::path& out_dir, const std::string& stem, std::ostream& log);

struct RiigReport {
    double ig_single = 0.0;
    double ig_multi = 0.0;
    double riig = 0.0;
    nlohmann::ordered_json json;
};

/// RIIG of two posterior sidecars. Throws ProvenanceError unless both share
/// the model, prior, grid, likelihood and the single run's observations.
[[nodiscard]] RiigReport compare_runs(const nlohmann::json& single, const nlohmann::json& multi);

[[nodiscard]] nlohmann::json read_json(const std::string& path);

/// Sweep over the configured axes; writes sweep.csv, manifest.json and
/// timing.json. Progress goes to `log`.
std::vector<SweepResult> cmd_sweep(const RunConfig& config, bool full, const std::filesystem::path& out_dir,
                                   std::ostream& log);

struct FigureRow {
    std::string label;
    std::size_t n_obs2 = 0;
    double snr2 = 0.0;
    double ig_single = 0.0;
    double ig_multi = 0.0;
    double riig = 0.0;
    double reference_riig = 0.0;
};

/// Regenerates the artifacts of "fig9" or "fig10" under `out_dir/<figure>`
/// and returns the summary rows.
std::vector<FigureRow> cmd_reproduce(const std::string& figure, const RunConfig& config, bool full,
                                     const std::filesystem::path& out_dir, std::ostream& log);

void print_summary(std::ostream& out, const std::vector<FigureRow>& rows);

/// Full command line entry point. Returns the process exit code.
[[nodiscard]] int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mpbia::cli
