#include "mpbia/config.hpp"

#include "mpbia/error.hpp"
#include "mpbia/toy_full.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace mpbia {

namespace {

using json = nlohmann::json;

struct Unit {
    const char* symbol;
    Dimension dimension;
    double scale;
};

constexpr Unit kUnits[] = {
    {"Pa", Dimension::Pressure, 1.0},      {"kPa", Dimension::Pressure, 1e3},  {"MPa", Dimension::Pressure, 1e6},
    {"GPa", Dimension::Pressure, 1e9},     {"m", Dimension::Length, 1.0},      {"cm", Dimension::Length, 1e-2},
    {"mm", Dimension::Length, 1e-3},       {"um", Dimension::Length, 1e-6},    {"N", Dimension::Force, 1.0},
    {"mN", Dimension::Force, 1e-3},        {"kN", Dimension::Force, 1e3},      {"V", Dimension::Voltage, 1.0},
    {"mV", Dimension::Voltage, 1e-3},      {"kV", Dimension::Voltage, 1e3},    {"Ohm m", Dimension::Resistivity, 1.0},
    {"Ohm*m", Dimension::Resistivity, 1.0}, {"Ohm.m", Dimension::Resistivity, 1.0},
};

const char* dimension_name(Dimension d) {
    switch (d) {
        case Dimension::None: return "dimensionless";
        case Dimension::Pressure: return "pressure";
        case Dimension::Length: return "length";
        case Dimension::Force: return "force";
        case Dimension::Voltage: return "voltage";
        case Dimension::Resistivity: return "resistivity";
    }
    return "unknown";
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& section) {
    if (!obj.is_object()) throw ConfigError(section + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!keys.contains(key)) throw ConfigError(section + ": unknown key '" + key + "'");
    }
}

std::vector<double> parse_vector(const json& value, const std::vector<Dimension>& dims, const std::string& key) {
    if (!value.is_array() || value.size() != dims.size()) {
        throw ConfigError(key + ": expected an array of " + std::to_string(dims.size()) + " values");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        out.push_back(parse_quantity(value[i], dims[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::size_t parse_count(const json& value, const std::string& key) {
    if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
        throw ConfigError(key + ": expected a non-negative integer");
    }
    return value.get<std::size_t>();
}

double parse_number(const json& value, const std::string& key) { return parse_quantity(value, Dimension::None, key); }

std::vector<Dimension> parameter_dims(const std::string& model) {
    if (model == "electromech") return {Dimension::Pressure, Dimension::None};
    return {Dimension::None, Dimension::None};
}

Dimension coordinate_dim(const std::string& model) {
    return model == "electromech" ? Dimension::Force : Dimension::None;
}

std::string hex64(std::uint64_t h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return out;
}

}  // namespace

double parse_quantity(const json& value, Dimension dimension, const std::string& key) {
    if (value.is_number()) return value.get<double>();
    if (!value.is_string()) throw ConfigError(key + ": expected a number or a '<value> <unit>' string");
    const std::string text = trim(value.get<std::string>());
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();

    std::size_t consumed = 0;
    double number = 0.0;
    try {
        number = std::stod(text, &consumed);
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + text + "'");
    }
    const std::string unit = trim(text.substr(consumed));
    if (unit.empty()) return number;
    for (const Unit& u : kUnits) {
        if (unit == u.symbol) {
            if (u.dimension != dimension) {
                throw ConfigError(key + ": unit '" + unit + "' is not a " + dimension_name(dimension) + " unit");
            }
            return number * u.scale;
        }
    }
    throw ConfigError(key + ": unknown unit '" + unit + "'");
}

void RunConfig::validate() const {
    if (model != "electromech" && model != "toy-full") {
        throw ConfigError("model: expected 'electromech' or 'toy-full', got '" + model + "'");
    }
    try {
        if (model == "electromech") electromech_constants.validate();
        prior.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("prior/constants: ") + e.what());
    }
    if (prior.dimension() != 2) throw ConfigError("prior: expected 2 parameters");
    if (truth.size() != prior.dimension()) throw ConfigError("truth: expected one value per parameter");
    if (grid.size() != prior.dimension()) throw ConfigError("grid: expected one count per parameter");
    for (std::size_t n : grid) {
        if (n < 2) throw ConfigError("grid: every dimension needs at least 2 points");
    }
    std::set<FieldId> ids;
    for (const FieldSpec& f : fields) {
        const std::string key = "fields[" + std::to_string(f.id) + "]";
        if (f.id != 1 && f.id != 2) throw ConfigError(key + ": id must be 1 or 2");
        if (!ids.insert(f.id).second) throw ConfigError(key + ": duplicate field id");
        if (!(f.observations.snr > 0.0)) throw ConfigError(key + ".snr: must be positive");
        if (!(f.observations.coord_max >= f.observations.coord_min)) throw ConfigError(key + ".range: empty range");
        if (model == "electromech" && f.observations.coord_min < 0.0) {
            throw ConfigError(key + ".range: forces must be non-negative");
        }
    }
    if (workers < 1) throw ConfigError("workers: must be at least 1");
    if (sweep.n_obs2.min < 1.0 || sweep.n_obs2.max < sweep.n_obs2.min || sweep.n_obs2.count < 1) {
        throw ConfigError("sweep.n_obs2: need 1 <= min <= max and count >= 1");
    }
    if (!(sweep.snr2.min > 0.0) || sweep.snr2.max < sweep.snr2.min || sweep.snr2.count < 1) {
        throw ConfigError("sweep.snr2: need 0 < min <= max and count >= 1");
    }
}

const FieldSpec* RunConfig::field(FieldId id) const {
    for (const FieldSpec& f : fields) {
        if (f.id == id) return &f;
    }
    return nullptr;
}

std::vector<std::string> RunConfig::parameter_names() const {
    if (model == "electromech") return {"E", "nu"};
    return {"x1", "x2"};
}

RunConfig default_config(const std::string& model) {
    RunConfig cfg;
    cfg.model = model;
    if (model == "electromech") {
        cfg.truth = {11.0e3, 0.35};
        cfg.prior = electromech_prior();
        cfg.fields = {{1, {16, 50.0, 0.0, 0.4}}, {2, {2, 1.2e4, 0.0, 0.4}}};
        cfg.grid = {100, 100};
    } else if (model == "toy-full") {
        cfg.truth = {toy::kToyTruth[0], toy::kToyTruth[1]};
        cfg.prior = toy::toy_prior();
        cfg.fields = {{1, {8, 20.0, 0.1, 1.0}}, {2, {8, 200.0, 0.1, 1.0}}};
        cfg.grid = {60, 60};
        cfg.sweep.n_obs2 = {1.0, 64.0, 6};
        cfg.sweep.snr2 = {1.0, 1e4, 5};
    } else {
        throw ConfigError("model: expected 'electromech' or 'toy-full', got '" + model + "'");
    }
    return cfg;
}

RunConfig config_from_json(const json& doc) {
    reject_unknown(doc,
                   {"model", "constants", "truth", "prior", "fields", "grid", "likelihood", "sweep", "output_dir",
                    "workers"},
                   "config");
    const std::string model = doc.contains("model") ? doc.at("model").get<std::string>() : "electromech";
    RunConfig cfg = default_config(model);
    const std::vector<Dimension> dims = parameter_dims(model);

    if (doc.contains("constants")) {
        const json& c = doc.at("constants");
        if (model == "electromech") {
            reject_unknown(c, {"side_length", "voltage", "resistivity"}, "constants");
            auto& p = cfg.electromech_constants;
            if (c.contains("side_length")) {
                p.side_length = parse_quantity(c.at("side_length"), Dimension::Length, "constants.side_length");
            }
            if (c.contains("voltage")) p.voltage = parse_quantity(c.at("voltage"), Dimension::Voltage, "constants.voltage");
            if (c.contains("resistivity")) {
                p.resistivity = parse_quantity(c.at("resistivity"), Dimension::Resistivity, "constants.resistivity");
            }
        } else {
            reject_unknown(c, {"coupling"}, "constants");
            if (c.contains("coupling")) cfg.toy_coupling = parse_number(c.at("coupling"), "constants.coupling");
        }
    }
    if (doc.contains("truth")) cfg.truth = parse_vector(doc.at("truth"), dims, "truth");
    if (doc.contains("prior")) {
        const json& p = doc.at("prior");
        reject_unknown(p, {"mean", "stddev", "variance", "lower", "upper"}, "prior");
        if (p.contains("stddev") && p.contains("variance")) {
            throw ConfigError("prior: give either 'stddev' or 'variance', not both");
        }
        if (p.contains("mean")) cfg.prior.mean = parse_vector(p.at("mean"), dims, "prior.mean");
        if (p.contains("stddev")) {
            const std::vector<double> sd = parse_vector(p.at("stddev"), dims, "prior.stddev");
            cfg.prior.variance.clear();
            for (double s : sd) cfg.prior.variance.push_back(s * s);
        }
        if (p.contains("variance")) {
            std::vector<Dimension> squared(dims.size(), Dimension::None);
            cfg.prior.variance = parse_vector(p.at("variance"), squared, "prior.variance");
        }
        if (p.contains("lower")) cfg.prior.lower = parse_vector(p.at("lower"), dims, "prior.lower");
        if (p.contains("upper")) cfg.prior.upper = parse_vector(p.at("upper"), dims, "prior.upper");
    }
    if (doc.contains("fields")) {
        const json& fields = doc.at("fields");
        if (!fields.is_array()) throw ConfigError("fields: expected an array");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const json& f = fields[i];
            const std::string key = "fields[" + std::to_string(i) + "]";
            reject_unknown(f, {"id", "count", "snr", "range"}, key);
            if (!f.contains("id")) throw ConfigError(key + ": missing 'id'");
            const auto id = static_cast<FieldId>(parse_count(f.at("id"), key + ".id"));
            FieldSpec* target = nullptr;
            for (FieldSpec& existing : cfg.fields) {
                if (existing.id == id) target = &existing;
            }
            if (target == nullptr) {
                cfg.fields.push_back({id, {}});
                target = &cfg.fields.back();
            }
            if (f.contains("count")) target->observations.count = parse_count(f.at("count"), key + ".count");
            if (f.contains("snr")) target->observations.snr = parse_number(f.at("snr"), key + ".snr");
            if (f.contains("range")) {
                const std::vector<double> r =
                    parse_vector(f.at("range"), {coordinate_dim(model), coordinate_dim(model)}, key + ".range");
                target->observations.coord_min = r[0];
                target->observations.coord_max = r[1];
            }
        }
    }
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        if (!g.is_array()) throw ConfigError("grid: expected an array of counts");
        cfg.grid.clear();
        for (std::size_t i = 0; i < g.size(); ++i) cfg.grid.push_back(parse_count(g[i], "grid"));
    }
    if (doc.contains("likelihood")) {
        const std::string s = doc.at("likelihood").get<std::string>();
        if (s == "gaussian") {
            cfg.likelihood = LikelihoodScale::Gaussian;
        } else if (s == "unit") {
            cfg.likelihood = LikelihoodScale::Unit;
        } else {
            throw ConfigError("likelihood: expected 'gaussian' or 'unit'");
        }
    }
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        reject_unknown(s, {"n_obs2", "snr2", "full_n_obs2_count", "full_snr2_count"}, "sweep");
        auto axis = [](const json& a, AxisSpec& out, const std::string& key) {
            reject_unknown(a, {"min", "max", "count"}, key);
            if (a.contains("min")) out.min = parse_number(a.at("min"), key + ".min");
            if (a.contains("max")) out.max = parse_number(a.at("max"), key + ".max");
            if (a.contains("count")) out.count = parse_count(a.at("count"), key + ".count");
        };
        if (s.contains("n_obs2")) axis(s.at("n_obs2"), cfg.sweep.n_obs2, "sweep.n_obs2");
        if (s.contains("snr2")) axis(s.at("snr2"), cfg.sweep.snr2, "sweep.snr2");
        if (s.contains("full_n_obs2_count")) {
            cfg.sweep.full_n_obs2_count = parse_count(s.at("full_n_obs2_count"), "sweep.full_n_obs2_count");
        }
        if (s.contains("full_snr2_count")) {
            cfg.sweep.full_snr2_count = parse_count(s.at("full_snr2_count"), "sweep.full_snr2_count");
        }
    }
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("workers")) cfg.workers = static_cast<int>(parse_count(doc.at("workers"), "workers"));
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    try {
        return config_from_json(doc);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

nlohmann::ordered_json config_to_json(const RunConfig& config) {
    nlohmann::ordered_json j;
    auto numbers = [](const std::vector<double>& v) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (double x : v) arr.push_back(format_double(x));
        return arr;
    };
    j["model"] = config.model;
    if (config.model == "electromech") {
        j["constants"] = {{"side_length", format_double(config.electromech_constants.side_length)},
                          {"voltage", format_double(config.electromech_constants.voltage)},
                          {"resistivity", format_double(config.electromech_constants.resistivity)}};
    } else {
        j["constants"] = {{"coupling", format_double(config.toy_coupling)}};
    }
    j["truth"] = numbers(config.truth);
    j["prior"] = {{"mean", numbers(config.prior.mean)},
                  {"variance", numbers(config.prior.variance)},
                  {"lower", numbers(config.prior.lower)},
                  {"upper", numbers(config.prior.upper)}};
    nlohmann::ordered_json fields = nlohmann::ordered_json::array();
    for (const FieldSpec& f : config.fields) {
        fields.push_back({{"id", f.id},
                          {"count", f.observations.count},
                          {"snr", format_double(f.observations.snr)},
                          {"range", numbers({f.observations.coord_min, f.observations.coord_max})}});
    }
    j["fields"] = fields;
    j["grid"] = config.grid;
    j["likelihood"] = config.likelihood == LikelihoodScale::Gaussian ? "gaussian" : "unit";
    j["sweep"] = {{"n_obs2", {{"min", format_double(config.sweep.n_obs2.min)},
                              {"max", format_double(config.sweep.n_obs2.max)},
                              {"count", config.sweep.n_obs2.count}}},
                  {"snr2", {{"min", format_double(config.sweep.snr2.min)},
                            {"max", format_double(config.sweep.snr2.max)},
                            {"count", config.sweep.snr2.count}}},
                  {"full_n_obs2_count", config.sweep.full_n_obs2_count},
                  {"full_snr2_count", config.sweep.full_snr2_count}};
    return j;
}

std::unique_ptr<ForwardModel> make_model(const RunConfig& config) {
    if (config.model == "electromech") {
        return std::make_unique<electromech::ElectromechModel>(config.electromech_constants);
    }
    if (config.model == "toy-full") return std::make_unique<toy::ToyFullModel>(config.toy_coupling);
    throw ConfigError("model: unknown model '" + config.model + "'");
}

SweepSpec make_sweep_spec(const RunConfig& config, bool full) {
    const FieldSpec* first = config.field(1);
    if (first == nullptr) throw ConfigError("fields: a sweep needs a field-1 configuration");
    SweepSpec spec;
    spec.first_field = first->observations;
    if (const FieldSpec* second = config.field(2)) {
        spec.second_coord_min = second->observations.coord_min;
        spec.second_coord_max = second->observations.coord_max;
    }
    const std::size_t n_count = full ? config.sweep.full_n_obs2_count : config.sweep.n_obs2.count;
    const std::size_t s_count = full ? config.sweep.full_snr2_count : config.sweep.snr2.count;
    spec.n_obs2_axis = log_spaced_counts(static_cast<std::size_t>(std::llround(config.sweep.n_obs2.min)),
                                         static_cast<std::size_t>(std::llround(config.sweep.n_obs2.max)), n_count);
    spec.snr2_axis = log_spaced(config.sweep.snr2.min, config.sweep.snr2.max, s_count);
    spec.x_true = config.truth;
    spec.prior = config.prior;
    spec.grid_points = config.grid;
    spec.scale = config.likelihood;
    spec.workers = config.workers;
    return spec;
}

std::string content_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

std::string prior_hash(const TruncatedNormalPrior& prior) {
    std::ostringstream s;
    auto put = [&](const char* name, const std::vector<double>& v) {
        s << name;
        for (double x : v) s << ',' << format_double(x);
        s << ';';
    };
    put("mean", prior.mean);
    put("variance", prior.variance);
    put("lower", prior.lower);
    put("upper", prior.upper);
    return content_hash(s.str());
}

std::string observations_hash(const FieldObservations& obs) {
    std::ostringstream s;
    write_observations_csv(s, obs);
    return content_hash(s.str());
}

}  // namespace mpbia
