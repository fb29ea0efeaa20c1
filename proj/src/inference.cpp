#include "mpbia/inference.hpp"

#include "mpbia/error.hpp"
#include "mpbia/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace mpbia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tensor-product trapezoid weight of every node.
std::vector<double> node_weights(const Axes& axes) {
    std::vector<double> weights(node_count(axes), 1.0);
    std::size_t stride = weights.size();
    for (const auto& axis : axes) {
        const std::vector<double> w = trapezoid_weights(axis);
        stride /= axis.size();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            weights[i] *= w[(i / stride) % axis.size()];
        }
    }
    return weights;
}

bool on_boundary(const Axes& axes, std::size_t flat) {
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
        const std::size_t n = it->size();
        const std::size_t k = flat % n;
        if (k == 0 || k + 1 == n) return true;
        flat /= n;
    }
    return false;
}

double weighted_sum(std::span<const double> weights, std::span<const double> values) {
    std::vector<double> terms(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) terms[i] = weights[i] * values[i];
    return pairwise_sum(terms);
}

}  // namespace

std::vector<std::size_t> PosteriorGrid::shape() const {
    std::vector<std::size_t> s;
    for (const auto& axis : axes) s.push_back(axis.size());
    return s;
}

std::vector<double> PosteriorGrid::node(std::size_t flat) const { return grid_node(axes, flat); }

std::size_t node_count(const Axes& axes) {
    if (axes.empty()) return 0;
    std::size_t n = 1;
    for (const auto& axis : axes) n *= axis.size();
    return n;
}

std::vector<double> grid_node(const Axes& axes, std::size_t flat) {
    std::vector<double> x(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const std::size_t n = axes[k].size();
        x[k] = axes[k][flat % n];
        flat /= n;
    }
    return x;
}

void validate_axes(const Axes& axes) {
    if (axes.empty()) throw DomainError("grid has no axes");
    for (const auto& axis : axes) {
        if (axis.size() < 2) throw DomainError("every grid axis needs at least 2 points");
        for (std::size_t i = 0; i < axis.size(); ++i) {
            if (!std::isfinite(axis[i])) throw DomainError("grid axis contains a non-finite coordinate");
            if (i > 0 && !(axis[i] > axis[i - 1])) throw DomainError("grid axis must be strictly increasing");
        }
    }
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> trapezoid_weights(std::span<const double> axis) {
    const std::size_t n = axis.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = 0.5 * (axis[i + 1] - axis[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

double trapezoid_integral(const Axes& axes, std::span<const double> values) {
    if (values.size() != node_count(axes)) {
        throw StructuralError("tensor size does not match grid shape");
    }
    const std::vector<double> w = node_weights(axes);
    return weighted_sum(w, values);
}

Axes cdf_spaced_grid(const TruncatedNormalPrior& prior, std::span<const std::size_t> points_per_dim) {
    prior.validate();
    if (points_per_dim.size() != prior.dimension()) {
        throw DomainError("points_per_dim must have one entry per prior dimension");
    }
    Axes axes(prior.dimension());
    for (std::size_t k = 0; k < prior.dimension(); ++k) {
        const std::size_t n = points_per_dim[k];
        if (n < 2) throw DomainError("cdf_spaced_grid needs at least 2 points per dimension");
        axes[k].reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            axes[k].push_back(prior.marginal_quantile(k, u));
        }
    }
    validate_axes(axes);
    return axes;
}

PosteriorGrid evaluate_posterior(const TruncatedNormalPrior& prior, const LogLikelihoodFn& log_likelihood,
                                 const Axes& axes, int workers) {
    validate_axes(axes);
    std::vector<double> ll(node_count(axes));
    parallel_for(ll.size(), workers, [&](std::size_t i) {
        const std::vector<double> x = grid_node(axes, i);
        ll[i] = log_likelihood(x);
    });
    return evaluate_posterior(prior, std::move(ll), axes);
}

PosteriorGrid evaluate_posterior(const TruncatedNormalPrior& prior, std::vector<double> log_likelihood,
                                 const Axes& axes) {
    prior.validate();
    validate_axes(axes);
    if (axes.size() != prior.dimension()) throw DomainError("grid dimension does not match prior dimension");
    const std::size_t n = node_count(axes);
    if (log_likelihood.size() != n) throw StructuralError("log-likelihood tensor does not match grid shape");

    PosteriorGrid grid;
    grid.axes = axes;
    grid.log_likelihood = std::move(log_likelihood);
    grid.log_prior.resize(n);
    grid.log_unnormalized.resize(n);
    double shift = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        grid.log_prior[i] = prior_log_density(prior, grid_node(axes, i));
        const double ll = grid.log_likelihood[i];
        if (std::isnan(ll) || ll == kInf) {
            throw InferenceError("log-likelihood is NaN or +inf at node " + std::to_string(i));
        }
        if (ll == -kInf) ++grid.failed_nodes;
        grid.log_unnormalized[i] = grid.log_prior[i] + ll;
        shift = std::max(shift, grid.log_unnormalized[i]);
    }
    if (!std::isfinite(shift)) {
        throw InferenceError("posterior vanishes on every grid node");
    }

    std::vector<double> shifted(n);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = std::exp(grid.log_unnormalized[i] - shift);
    const std::vector<double> w = node_weights(axes);
    const double integral = weighted_sum(w, shifted);
    if (!(integral > 0.0) || !std::isfinite(integral)) {
        throw InferenceError("posterior normalization is zero or non-finite");
    }
    grid.log_normalization = shift + std::log(integral);
    grid.normalization = std::exp(grid.log_normalization);

    grid.density.resize(n);
    for (std::size_t i = 0; i < n; ++i) grid.density[i] = shifted[i] / integral;

    std::vector<double> boundary(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (on_boundary(axes, i)) boundary[i] = grid.density[i];
    }
    grid.boundary_mass = weighted_sum(w, boundary) / weighted_sum(w, grid.density);
    if (grid.boundary_mass > kBoundaryMassWarning) {
        grid.warnings.push_back("boundary mass " + format_double(grid.boundary_mass) +
                                " exceeds 5%: grid may not cover the posterior");
    }
    if (grid.failed_nodes > 0) {
        grid.warnings.push_back(std::to_string(grid.failed_nodes) + " grid nodes had failed model evaluations");
    }
    return grid;
}

std::span<const double> GridFieldOutputs::node_outputs(std::size_t node) const {
    const std::size_t stride = coordinates.size() * output_dim;
    return std::span<const double>(values).subspan(node * stride, stride);
}

GridFieldOutputs evaluate_grid_outputs(const ForwardModel& model, const Axes& axes, FieldId field,
                                       std::span<const double> coordinates, int workers) {
    validate_axes(axes);
    GridFieldOutputs out;
    out.field = field;
    out.coordinates.assign(coordinates.begin(), coordinates.end());
    out.output_dim = model.output_dim(field);
    const std::size_t n = node_count(axes);
    const std::size_t stride = coordinates.size() * out.output_dim;
    out.values.assign(n * stride, std::numeric_limits<double>::quiet_NaN());
    out.failed.assign(n, 0);
    if (stride == 0) return out;

    parallel_for(n, workers, [&](std::size_t i) {
        const std::vector<double> x = grid_node(axes, i);
        try {
            const std::vector<double> y = model.evaluate_field(x, field, coordinates);
            if (y.size() != stride) throw StructuralError("model returned wrong number of outputs");
            std::copy(y.begin(), y.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * stride));
        } catch (const StructuralError&) {
            throw;
        } catch (const Error&) {
            out.failed[i] = 1;
        }
    });
    out.failed_count = static_cast<std::size_t>(std::count(out.failed.begin(), out.failed.end(), std::uint8_t{1}));
    return out;
}

std::vector<double> grid_log_likelihood(const GridFieldOutputs& outputs, const FieldObservations& obs,
                                        LikelihoodScale scale) {
    const std::size_t n = outputs.failed.size();
    std::vector<double> ll(n, 0.0);
    if (obs.count() == 0) return ll;
    obs.validate();
    if (obs.field_id != outputs.field || obs.coordinates != outputs.coordinates ||
        obs.output_dim != outputs.output_dim) {
        throw StructuralError("cached grid outputs do not match the observation set");
    }
    const double coeff = likelihood_factor(scale) / obs.noise_variance;
    for (std::size_t i = 0; i < n; ++i) {
        ll[i] = outputs.failed[i] ? -kInf : -coeff * squared_misfit(outputs.node_outputs(i), obs);
    }
    return ll;
}

std::vector<double> grid_log_likelihood(const ForwardModel& model, const Axes& axes,
                                        std::span<const FieldObservations> observations, LikelihoodScale scale,
                                        int workers) {
    std::vector<double> total(node_count(axes), 0.0);
    for (const FieldObservations& obs : observations) {
        if (obs.count() == 0) continue;
        const GridFieldOutputs outputs = evaluate_grid_outputs(model, axes, obs.field_id, obs.coordinates, workers);
        const std::vector<double> ll = grid_log_likelihood(outputs, obs, scale);
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += ll[i];
    }
    return total;
}

double information_gain(const PosteriorGrid& posterior, const TruncatedNormalPrior& prior) {
    const std::size_t n = posterior.node_count();
    if (n == 0 || n != node_count(posterior.axes)) throw InferenceError("posterior grid is empty or malformed");

    std::vector<double> log_prior(n);
    double shift = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        log_prior[i] = prior_log_density(prior, posterior.node(i));
        shift = std::max(shift, log_prior[i]);
    }
    if (!std::isfinite(shift)) throw InferenceError("prior vanishes on every grid node");
    const std::vector<double> w = node_weights(posterior.axes);
    std::vector<double> shifted(n);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = std::exp(log_prior[i] - shift);
    const double log_prior_norm = shift + std::log(weighted_sum(w, shifted));

    std::vector<double> integrand(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = posterior.density[i];
        if (p == 0.0) continue;
        if (log_prior[i] == -kInf) {
            throw InferenceError("posterior has mass where the prior density is zero (node " + std::to_string(i) +
                                 ")");
        }
        const double log_p = posterior.log_unnormalized[i] - posterior.log_normalization;
        const double log_q = log_prior[i] - log_prior_norm;
        integrand[i] = p * (log_p - log_q);
    }
    return weighted_sum(w, integrand);
}

double entropy_gaussian(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("variance must be positive and finite");
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance);
}

double kl_gaussians(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0, const Eigen::VectorXd& mean1,
                    const Eigen::MatrixXd& cov1) {
    const Eigen::Index k = mean0.size();
    if (mean1.size() != k || cov0.rows() != k || cov0.cols() != k || cov1.rows() != k || cov1.cols() != k) {
        throw DomainError("Gaussian dimensions do not match");
    }
    auto check = [](const Eigen::MatrixXd& c) {
        if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * c.cwiseAbs().maxCoeff()) {
            throw DomainError("covariance must be symmetric");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() != Eigen::Success) throw DomainError("covariance must be positive definite");
        return llt;
    };
    const Eigen::LLT<Eigen::MatrixXd> llt0 = check(cov0);
    const Eigen::LLT<Eigen::MatrixXd> llt1 = check(cov1);

    const Eigen::VectorXd diff = mean0 - mean1;
    const double trace = llt0.solve(cov1).trace();
    const double mahalanobis = diff.dot(llt0.solve(diff));
    auto log_det = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
        return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    };
    return 0.5 * (trace + mahalanobis - static_cast<double>(k) + log_det(llt0) - log_det(llt1));
}

double riig(double ig_single, double ig_multi) {
    if (!(ig_single > 0.0)) throw DomainError("RIIG is undefined for a non-positive single-physics information gain");
    return (ig_multi - ig_single) / ig_single;
}

void write_posterior_csv(std::ostream& out, const PosteriorGrid& posterior,
                         const std::vector<std::string>& parameter_names) {
    const std::size_t d = posterior.axes.size();
    for (std::size_t k = 0; k < d; ++k) {
        out << (k < parameter_names.size() ? parameter_names[k] : "p" + std::to_string(k)) << ',';
    }
    out << "log_unnormalized,density\n";
    for (std::size_t i = 0; i < posterior.node_count(); ++i) {
        for (double x : posterior.node(i)) out << format_double(x) << ',';
        out << format_double(posterior.log_unnormalized[i]) << ',' << format_double(posterior.density[i]) << '\n';
    }
}

nlohmann::ordered_json posterior_json(const PosteriorGrid& posterior, double information_gain) {
    nlohmann::ordered_json j;
    j["axes"] = posterior.axes;
    j["shape"] = posterior.shape();
    j["normalization"] = posterior.normalization;
    j["log_normalization"] = posterior.log_normalization;
    j["information_gain"] = information_gain;
    j["boundary_mass"] = posterior.boundary_mass;
    j["failed_nodes"] = posterior.failed_nodes;
    j["warnings"] = posterior.warnings;
    return j;
}

}  // namespace mpbia
