#include "mpbia/probabilistic.hpp"

#include "mpbia/error.hpp"
#include "mpbia/normal.hpp"
#include "mpbia/sobol.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mpbia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Standardized {
    double alpha;
    double beta;
};

Standardized standardized_bounds(const TruncatedNormalPrior& prior, std::size_t k) {
    const double sd = std::sqrt(prior.variance[k]);
    return {(prior.lower[k] - prior.mean[k]) / sd, (prior.upper[k] - prior.mean[k]) / sd};
}

double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    // from_chars does not accept a leading '+'
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("cannot parse number '" + std::string(text) + "' in " + context);
    }
    return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

void TruncatedNormalPrior::validate() const {
    const std::size_t n = mean.size();
    if (n == 0) throw DomainError("prior has no components");
    if (variance.size() != n || lower.size() != n || upper.size() != n) {
        throw DomainError("prior mean, variance and bounds must have equal length");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(mean[k])) throw DomainError("prior mean must be finite");
        if (!(variance[k] > 0.0) || !std::isfinite(variance[k])) {
            throw DomainError("prior variance must be positive and finite");
        }
        if (!(lower[k] < upper[k])) throw DomainError("prior lower bound must be below upper bound");
    }
}

double TruncatedNormalPrior::marginal_log_mass(std::size_t k) const {
    const auto [alpha, beta] = standardized_bounds(*this, k);
    // Evaluate in the tail where the difference does not cancel.
    const double mass = alpha > 0.0 ? normal_ccdf(alpha) - normal_ccdf(beta) : normal_cdf(beta) - normal_cdf(alpha);
    return std::log(mass);
}

double TruncatedNormalPrior::marginal_log_pdf(std::size_t k, double x) const {
    if (x < lower[k] || x > upper[k]) return -kInf;
    const double sd = std::sqrt(variance[k]);
    const double z = (x - mean[k]) / sd;
    return -0.5 * z * z - kLogSqrt2Pi - std::log(sd) - marginal_log_mass(k);
}

double TruncatedNormalPrior::marginal_cdf(std::size_t k, double x) const {
    if (x <= lower[k]) return 0.0;
    if (x >= upper[k]) return 1.0;
    const auto [alpha, beta] = standardized_bounds(*this, k);
    const double z = (x - mean[k]) / std::sqrt(variance[k]);
    if (alpha > 0.0) {
        return (normal_ccdf(alpha) - normal_ccdf(z)) / (normal_ccdf(alpha) - normal_ccdf(beta));
    }
    return (normal_cdf(z) - normal_cdf(alpha)) / (normal_cdf(beta) - normal_cdf(alpha));
}

double TruncatedNormalPrior::marginal_quantile(std::size_t k, double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    if (u == 0.0) return lower[k];
    if (u == 1.0) return upper[k];
    const auto [alpha, beta] = standardized_bounds(*this, k);
    double z;
    if (alpha > 0.0) {
        const double qa = normal_ccdf(alpha);
        const double qb = normal_ccdf(beta);
        z = -normal_quantile(qa - u * (qa - qb));
    } else {
        const double pa = normal_cdf(alpha);
        const double pb = normal_cdf(beta);
        z = normal_quantile(pa + u * (pb - pa));
    }
    const double x = mean[k] + std::sqrt(variance[k]) * z;
    return std::min(std::max(x, lower[k]), upper[k]);
}

TruncatedNormalPrior electromech_prior() {
    return TruncatedNormalPrior{
        .mean = {10.0e3, 0.3},
        .variance = {2.0e3 * 2.0e3, 0.15 * 0.15},
        .lower = {0.0, 0.0},
        .upper = {kInf, 0.5},
    };
}

double prior_log_density(const TruncatedNormalPrior& prior, std::span<const double> x) {
    if (x.size() != prior.dimension()) {
        throw DomainError("parameter vector length does not match prior dimension");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double term = prior.marginal_log_pdf(k, x[k]);
        if (term == -kInf) return -kInf;
        total += term;
    }
    return total;
}

void FieldObservations::validate() const {
    if (output_dim == 0) throw DomainError("observation output dimension must be positive");
    if (values.size() != coordinates.size() * output_dim) {
        throw DomainError("observation values do not match coordinates x output dimension");
    }
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
        throw DomainError("observation noise variance must be positive and finite");
    }
}

double sigma_from_snr(std::span<const double> truth_outputs, std::size_t output_dim, double snr) {
    if (!(snr > 0.0)) throw DomainError("SNR must be positive");
    if (output_dim == 0 || truth_outputs.empty() || truth_outputs.size() % output_dim != 0) {
        throw DomainError("truth outputs must be a non-empty multiple of the output dimension");
    }
    const double count = static_cast<double>(truth_outputs.size() / output_dim);
    double sum_sq = 0.0;
    for (double v : truth_outputs) sum_sq += v * v;
    if (!(sum_sq > 0.0)) {
        throw DomainError("all-zero truth outputs give a zero noise variance");
    }
    return sum_sq / count / (static_cast<double>(output_dim) * snr);
}

double snr_from_sigma(std::span<const double> truth_outputs, std::size_t output_dim, double noise_variance) {
    if (!(noise_variance > 0.0)) throw DomainError("noise variance must be positive");
    if (output_dim == 0 || truth_outputs.empty() || truth_outputs.size() % output_dim != 0) {
        throw DomainError("truth outputs must be a non-empty multiple of the output dimension");
    }
    const double count = static_cast<double>(truth_outputs.size() / output_dim);
    double sum_sq = 0.0;
    for (double v : truth_outputs) sum_sq += v * v;
    return sum_sq / count / (static_cast<double>(output_dim) * noise_variance);
}

FieldObservations synthesize_observations(const ForwardModel& model, std::span<const double> x_true, FieldId field,
                                          std::span<const double> coordinates, double snr) {
    if (!(snr > 0.0)) throw DomainError("SNR must be positive");
    FieldObservations obs;
    obs.field_id = field;
    obs.output_dim = model.output_dim(field);
    obs.coordinates.assign(coordinates.begin(), coordinates.end());
    obs.snr = snr;
    if (coordinates.empty()) {
        // No data: the variance is irrelevant but must stay valid.
        obs.noise_variance = 1.0;
        return obs;
    }
    std::vector<double> truth = model.evaluate_field(x_true, field, coordinates);
    obs.noise_variance = sigma_from_snr(truth, obs.output_dim, snr);
    const double sigma = std::sqrt(obs.noise_variance);
    const std::vector<double> z = sobol_standard_normal(truth.size());
    obs.values.resize(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        obs.values[i] = truth[i] + sigma * z[i];
    }
    return obs;
}

double likelihood_factor(LikelihoodScale scale) noexcept {
    return scale == LikelihoodScale::Gaussian ? 0.5 : 1.0;
}

double squared_misfit(std::span<const double> outputs, const FieldObservations& obs) {
    if (outputs.size() != obs.values.size()) {
        throw StructuralError("model outputs do not match observation layout");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double r = outputs[i] - obs.values[i];
        sum += r * r;
    }
    return sum;
}

double log_likelihood(const ForwardModel& model, std::span<const double> x,
                      std::span<const FieldObservations> observations, LikelihoodScale scale,
                      std::string* diagnostic) {
    const double factor = likelihood_factor(scale);
    double total = 0.0;
    for (const FieldObservations& obs : observations) {
        if (obs.count() == 0) continue;
        std::vector<double> outputs;
        try {
            outputs = model.evaluate_field(x, obs.field_id, obs.coordinates);
        } catch (const Error& e) {
            if (diagnostic != nullptr) {
                *diagnostic = "field " + std::to_string(obs.field_id) + ": " + e.what();
            }
            return -kInf;
        }
        total -= factor / obs.noise_variance * squared_misfit(outputs, obs);
    }
    return total;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_observations_csv(std::ostream& out, const FieldObservations& obs) {
    obs.validate();
    out << "field_id,coordinate,value,sigma2,snr\n";
    const std::string sigma2 = format_double(obs.noise_variance);
    const std::string snr = obs.snr ? format_double(*obs.snr) : std::string{};
    for (std::size_t i = 0; i < obs.count(); ++i) {
        for (std::size_t c = 0; c < obs.output_dim; ++c) {
            out << obs.field_id << ',' << format_double(obs.coordinates[i]) << ','
                << format_double(obs.values[i * obs.output_dim + c]) << ',' << sigma2 << ',' << snr << '\n';
        }
    }
}

void write_observations_csv(const std::string& path, const FieldObservations& obs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_observations_csv(out, obs);
    if (!out) throw Error("failed writing '" + path + "'");
}

FieldObservations read_observations_csv(std::istream& in, std::size_t output_dim) {
    if (output_dim == 0) throw DomainError("output dimension must be positive");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("observation CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "field_id,coordinate,value,sigma2,snr") {
        throw ConfigError("unexpected observation CSV header '" + line + "'");
    }
    FieldObservations obs;
    obs.output_dim = output_dim;
    obs.field_id = 0;
    std::vector<double> coords;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        const std::string context = "observation CSV row " + std::to_string(row);
        if (cells.size() != 5) throw ConfigError(context + ": expected 5 columns");
        const auto field = static_cast<FieldId>(parse_double(cells[0], context));
        if (obs.field_id == 0) {
            obs.field_id = field;
        } else if (field != obs.field_id) {
            throw ConfigError(context + ": mixed field ids in one file");
        }
        coords.push_back(parse_double(cells[1], context));
        obs.values.push_back(parse_double(cells[2], context));
        obs.noise_variance = parse_double(cells[3], context);
        if (!cells[4].empty()) obs.snr = parse_double(cells[4], context);
    }
    if (coords.size() % output_dim != 0) {
        throw ConfigError("observation rows are not a multiple of the output dimension");
    }
    for (std::size_t i = 0; i < coords.size(); i += output_dim) {
        for (std::size_t c = 1; c < output_dim; ++c) {
            if (coords[i + c] != coords[i]) {
                throw ConfigError("components of one vector observation must share a coordinate");
            }
        }
        obs.coordinates.push_back(coords[i]);
    }
    if (obs.count() > 0) obs.validate();
    return obs;
}

FieldObservations read_observations_csv(const std::string& path, std::size_t output_dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open observation file '" + path + "'");
    return read_observations_csv(in, output_dim);
}

}  // namespace mpbia
