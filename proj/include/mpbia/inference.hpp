#pragma once

// Grid-based posterior evaluation on tensor-product grids and the
// information-theoretic post-processing (entropy, information gain, RIIG).

#include "mpbia/forward_model.hpp"
#include "mpbia/probabilistic.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mpbia {

/// One strictly increasing coordinate list per parameter.
using Axes = std::vector<std::vector<double>>;

/// Boundary-shell mass above which a posterior carries a warning.
inline constexpr double kBoundaryMassWarning = 0.05;

/// Nodes are stored row-major: the last axis varies fastest.
struct PosteriorGrid {
    Axes axes;
    std::vector<double> log_prior;
    std::vector<double> log_likelihood;
    std::vector<double> log_unnormalized;
    std::vector<double> density;
    /// Trapezoidal evidence estimate; may underflow, see log_normalization.
    double normalization = 0.0;
    double log_normalization = 0.0;
    /// Fraction of the posterior mass carried by the outermost grid shell.
    double boundary_mass = 0.0;
    std::size_t failed_nodes = 0;
    std::vector<std::string> warnings;

    [[nodiscard]] std::vector<std::size_t> shape() const;
    [[nodiscard]] std::size_t node_count() const noexcept { return density.size(); }
    [[nodiscard]] std::vector<double> node(std::size_t flat) const;
};

[[nodiscard]] std::size_t node_count(const Axes& axes);
/// Parameter vector of node `flat` (row-major, last axis fastest).
[[nodiscard]] std::vector<double> grid_node(const Axes& axes, std::size_t flat);

/// Throws DomainError unless every axis has >= 2 strictly increasing finite entries.
void validate_axes(const Axes& axes);

/// Fixed-order pairwise (cascade) summation.
[[nodiscard]] double pairwise_sum(std::span<const double> values);

/// Trapezoid weights of a non-uniform 1D axis.
[[nodiscard]] std::vector<double> trapezoid_weights(std::span<const double> axis);

/// Tensor-product trapezoidal rule (iterated 1D trapezoids) over row-major node values.
[[nodiscard]] double trapezoid_integral(const Axes& axes, std::span<const double> values);

/// Per dimension, x_k = F^-1((k + 1/2) / n), k = 0..n-1, with F the marginal prior CDF.
[[nodiscard]] Axes cdf_spaced_grid(const TruncatedNormalPrior& prior, std::span<const std::size_t> points_per_dim);

using LogLikelihoodFn = std::function<double(std::span<const double>)>;

/// Posterior from a node-wise log-likelihood callback (which may return -inf).
[[nodiscard]] PosteriorGrid evaluate_posterior(const TruncatedNormalPrior& prior, const LogLikelihoodFn& log_likelihood,
                                               const Axes& axes, int workers = 1);

/// Posterior from a precomputed row-major log-likelihood tensor.
///
/// Normalizes in the log domain with a max-shift. Throws InferenceError when
/// the evidence integral is zero or non-finite. Attaches a warning when the
/// boundary-shell mass exceeds kBoundaryMassWarning.
[[nodiscard]] PosteriorGrid evaluate_posterior(const TruncatedNormalPrior& prior,
                                               std::vector<double> log_likelihood, const Axes& axes);

/// Model outputs of one field at every grid node, cached so that several
/// observation sets on the same coordinates can reuse them.
struct GridFieldOutputs {
    FieldId field = 1;
    std::vector<double> coordinates;
    std::size_t output_dim = 1;
    /// [node][coordinate][component]
    std::vector<double> values;
    std::vector<std::uint8_t> failed;
    std::size_t failed_count = 0;

    [[nodiscard]] std::span<const double> node_outputs(std::size_t node) const;
};

[[nodiscard]] GridFieldOutputs evaluate_grid_outputs(const ForwardModel& model, const Axes& axes, FieldId field,
                                                     std::span<const double> coordinates, int workers = 1);

/// Log-likelihood tensor of one observation set; -inf at nodes where the model failed.
[[nodiscard]] std::vector<double> grid_log_likelihood(const GridFieldOutputs& outputs, const FieldObservations& obs,
                                                      LikelihoodScale scale = LikelihoodScale::Gaussian);

/// Sum over observation sets of their log-likelihood tensors.
[[nodiscard]] std::vector<double> grid_log_likelihood(const ForwardModel& model, const Axes& axes,
                                                      std::span<const FieldObservations> observations,
                                                      LikelihoodScale scale = LikelihoodScale::Gaussian,
                                                      int workers = 1);

/// KL(posterior || prior) in nats by the tensor trapezoidal rule.
///
/// The prior is normalized on the same grid as the posterior so that both
/// are densities with respect to one quadrature; a posterior equal to the
/// prior then has zero information gain. 0 log 0 := 0. Throws InferenceError
/// where the prior vanishes but the posterior does not.
[[nodiscard]] double information_gain(const PosteriorGrid& posterior, const TruncatedNormalPrior& prior);

/// 1/2 log(2 pi e variance).
[[nodiscard]] double entropy_gaussian(double variance);

/// KL(N(mean1, cov1) || N(mean0, cov0)), closed form. Throws DomainError for
/// non-symmetric or non positive definite covariances.
[[nodiscard]] double kl_gaussians(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0,
                                  const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1);

/// (ig_multi - ig_single) / ig_single. Small negative results are legal
/// quadrature artifacts; ig_single <= 0 throws DomainError.
[[nodiscard]] double riig(double ig_single, double ig_multi);

/// Long-format CSV: p0..p{d-1}, log_unnormalized, density; one row per node.
void write_posterior_csv(std::ostream& out, const PosteriorGrid& posterior,
                         const std::vector<std::string>& parameter_names = {});

/// Sidecar with axes, normalization, boundary mass and the given information gain.
[[nodiscard]] nlohmann::ordered_json posterior_json(const PosteriorGrid& posterior, double information_gain);

}  // namespace mpbia
