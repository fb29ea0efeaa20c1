#pragma once

// Priors, the per-field Gaussian noise model, SNR bookkeeping, quasi-random
// observation synthesis and the multi-field Gaussian log-likelihood.

#include "mpbia/forward_model.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mpbia {

/// Product of independent truncated normals (diagonal covariance).
struct TruncatedNormalPrior {
    std::vector<double> mean;
    std::vector<double> variance;  ///< diagonal of the covariance
    std::vector<double> lower;     ///< may be -inf
    std::vector<double> upper;     ///< may be +inf

    [[nodiscard]] std::size_t dimension() const noexcept { return mean.size(); }

    /// Throws DomainError on size mismatch, non-positive variance or lower >= upper.
    void validate() const;

    [[nodiscard]] double marginal_log_pdf(std::size_t k, double x) const;
    [[nodiscard]] double marginal_cdf(std::size_t k, double x) const;
    [[nodiscard]] double marginal_quantile(std::size_t k, double u) const;
    /// log(Phi(beta) - Phi(alpha)) for component k.
    [[nodiscard]] double marginal_log_mass(std::size_t k) const;
};

/// Prior of the electromechanical example: E ~ TN(10 kPa, (2 kPa)^2, [0, inf)),
/// nu ~ TN(0.3, 0.15^2, [0, 0.5]), in SI units.
[[nodiscard]] TruncatedNormalPrior electromech_prior();

/// Log of the normalized truncated-normal density; -inf outside the box.
[[nodiscard]] double prior_log_density(const TruncatedNormalPrior& prior, std::span<const double> x);

/// Noisy observations of one field.
///
/// `values` is row-major [coordinate][component] with `output_dim` components
/// per coordinate.
struct FieldObservations {
    FieldId field_id = 1;
    std::vector<double> coordinates;
    std::vector<double> values;
    std::size_t output_dim = 1;
    double noise_variance = 1.0;
    std::optional<double> snr;

    [[nodiscard]] std::size_t count() const noexcept { return coordinates.size(); }

    /// Throws DomainError if the sizes disagree or the variance is not positive.
    void validate() const;
};

/// sigma^2 = mean_i ||M_i||^2 / (dim * snr) for row-major outputs.
/// Throws DomainError for snr <= 0, empty outputs, or all-zero outputs.
[[nodiscard]] double sigma_from_snr(std::span<const double> truth_outputs, std::size_t output_dim, double snr);

/// Inverse of sigma_from_snr: mean_i ||M_i||^2 / (dim * sigma^2).
[[nodiscard]] double snr_from_sigma(std::span<const double> truth_outputs, std::size_t output_dim,
                                    double noise_variance);

/// values = M_j(x_true, c_i) + sigma_j z_i with z from sobol_standard_normal,
/// one deviate per scalar component in row-major order.
[[nodiscard]] FieldObservations synthesize_observations(const ForwardModel& model, std::span<const double> x_true,
                                                        FieldId field, std::span<const double> coordinates,
                                                        double snr);

/// Coefficient in front of -||r||^2 / sigma^2.
enum class LikelihoodScale {
    Gaussian,  ///< 1/2, the log-density of N(0, sigma^2 I) up to a constant
    Unit       ///< 1, the sum of squared standardized residuals
};

[[nodiscard]] double likelihood_factor(LikelihoodScale scale) noexcept;

/// sum_i ||M(x, c_i) - y_i||^2 given precomputed outputs (same layout as obs.values).
[[nodiscard]] double squared_misfit(std::span<const double> outputs, const FieldObservations& obs);

/// sum_j -(factor / sigma_j^2) sum_i ||M_j(x, c_ij) - y_ij||^2.
///
/// A model failure at `x` yields -inf and, if `diagnostic` is given, the reason.
[[nodiscard]] double log_likelihood(const ForwardModel& model, std::span<const double> x,
                                    std::span<const FieldObservations> observations,
                                    LikelihoodScale scale = LikelihoodScale::Gaussian,
                                    std::string* diagnostic = nullptr);

/// CSV with header `field_id,coordinate,value,sigma2,snr`, one row per scalar component.
void write_observations_csv(std::ostream& out, const FieldObservations& obs);
void write_observations_csv(const std::string& path, const FieldObservations& obs);

/// Parses the CSV written above. Rows with equal consecutive coordinate are
/// grouped into one vector observation of `output_dim` components.
[[nodiscard]] FieldObservations read_observations_csv(std::istream& in, std::size_t output_dim = 1);
[[nodiscard]] FieldObservations read_observations_csv(const std::string& path, std::size_t output_dim = 1);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double value);

}  // namespace mpbia
