#pragma once

// Run configuration: a JSON document with nested sections. Dimensioned values
// may be given as plain numbers (SI) or as strings with a unit ("11 kPa",
// "10 mm", "0.4 N"); they are converted to SI at parse time.

#include "mpbia/electromech.hpp"
#include "mpbia/forward_model.hpp"
#include "mpbia/probabilistic.hpp"
#include "mpbia/sweep.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace mpbia {

enum class Dimension { None, Pressure, Length, Force, Voltage, Resistivity };

/// Converts a JSON number or "<value> <unit>" string to SI. Accepts "inf" and
/// "-inf". Throws ConfigError with `key` in the message on bad input.
[[nodiscard]] double parse_quantity(const nlohmann::json& value, Dimension dimension, const std::string& key);

struct FieldSpec {
    FieldId id = 1;
    ObservationConfig observations;
};

struct AxisSpec {
    double min = 1.0;
    double max = 1.0;
    std::size_t count = 1;
};

struct SweepAxesSpec {
    AxisSpec n_obs2{1.0, 256.0, 10};
    AxisSpec snr2{10.0, 1.2e4, 6};
    std::size_t full_n_obs2_count = 50;
    std::size_t full_snr2_count = 12;
};

struct RunConfig {
    std::string model = "electromech";
    electromech::ElectromechParams electromech_constants;
    double toy_coupling = 0.5;
    std::vector<double> truth;
    TruncatedNormalPrior prior;
    std::vector<FieldSpec> fields;
    std::vector<std::size_t> grid{100, 100};
    LikelihoodScale likelihood = LikelihoodScale::Gaussian;
    SweepAxesSpec sweep;
    std::string output_dir = "out";
    int workers = 1;

    /// Throws ConfigError with a field-level message.
    void validate() const;
    [[nodiscard]] const FieldSpec* field(FieldId id) const;
    [[nodiscard]] std::vector<std::string> parameter_names() const;
};

/// Built-in defaults for "electromech" (the tensile-test study) or "toy-full".
[[nodiscard]] RunConfig default_config(const std::string& model = "electromech");

/// Defaults of the named model overridden by the keys present in `doc`.
/// Unknown keys are rejected.
[[nodiscard]] RunConfig config_from_json(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Canonical SI echo of a configuration (also the input of its provenance hash).
[[nodiscard]] nlohmann::ordered_json config_to_json(const RunConfig& config);

[[nodiscard]] std::unique_ptr<ForwardModel> make_model(const RunConfig& config);

/// Sweep spec derived from the config; `full` selects the high-resolution axes.
[[nodiscard]] SweepSpec make_sweep_spec(const RunConfig& config, bool full);

/// 64-bit FNV-1a of `text`, as 16 hex digits.
[[nodiscard]] std::string content_hash(std::string_view text);
[[nodiscard]] std::string prior_hash(const TruncatedNormalPrior& prior);
[[nodiscard]] std::string observations_hash(const FieldObservations& obs);

}  // namespace mpbia
