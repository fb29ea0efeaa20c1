#pragma once

// One-way coupled electromechanical tensile test: a Saint Venant-Kirchhoff cube
// elongated by a force F (mechanical field, displacement d) with a voltage U
// applied across it (electrical field, current I). All quantities are SI.

#include "mpbia/coupled_core.hpp"
#include "mpbia/error.hpp"
#include "mpbia/forward_model.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace mpbia::electromech {

struct ElectromechParams {
    double youngs_modulus = 11.0e3;  ///< E, Pa
    double poisson_ratio = 0.35;     ///< nu
    double side_length = 0.01;       ///< l0, m
    double voltage = 10.0;           ///< U, V
    double resistivity = 1.0;        ///< rho, Ohm m

    /// Throws DomainError unless E > 0, 0 <= nu < 0.5, l0 > 0 and rho > 0.
    void validate() const;
};

struct ElectromechState {
    double displacement = 0.0;  ///< d, m
    double current = 0.0;       ///< I, A
};

/// f1(d) = 2 l0^2 d + 3 l0 d^2 + d^3 - (2 F l0 / E)(1 - nu^2), in m^3.
[[nodiscard]] double residual_mech(double d, const ElectromechParams& params, double force);

/// f2(d, I) = rho (l0 + d) I - U l0 sqrt(l0^2 - nu/(1-nu) (2 l0 d + d^2)), in V m.
/// Throws DomainError when the cross-section radicand is negative.
[[nodiscard]] double residual_elec(double d, double current, const ElectromechParams& params);

/// l0^2 - nu/(1-nu) (2 l0 d + d^2), i.e. (l0 * F22)^2: the squared deformed lateral width.
[[nodiscard]] double cross_section_radicand(double d, const ElectromechParams& params);

/// [[df1/dd, 0], [df2/dd, df2/dI]]. The upper-right entry is exactly zero.
[[nodiscard]] Eigen::Matrix2d jacobian(const ElectromechState& state, const ElectromechParams& params,
                                       double force);

/// The two-field system at fixed force, declared one-way coupled. Its rows are
/// f1 / l0^3 and f2 / (U l0^2), so residual tolerances are dimensionless.
[[nodiscard]] CoupledSystem make_system(const ElectromechParams& params, double force);

/// Current that satisfies f2 = 0 for a given displacement.
[[nodiscard]] double current_for_displacement(double d, const ElectromechParams& params);

/// Zero-force solution (0, U l0 / rho); also the default Newton start.
[[nodiscard]] ElectromechState undeformed_state(const ElectromechParams& params);

enum class SolveMode {
    Sequential,  ///< f1 for d, then f2 for I with d frozen
    Monolithic   ///< Newton on the stacked 2x2 system
};

struct EvaluateOptions {
    SolveMode mode = SolveMode::Sequential;
    double residual_tolerance = 1e-12;
    int max_iterations = 50;
    bool damping = false;
    std::optional<ElectromechState> initial_guess;
};

struct Evaluation {
    ElectromechState state;
    int iterations = 0;
};

/// Solves [d, I] = M(E, nu) at one force value. Requires F >= 0.
[[nodiscard]] Evaluation evaluate(const ElectromechParams& params, double force,
                                  const EvaluateOptions& options = {});

/// Element-wise evaluate over `forces`, warm-starting each point from the
/// previous solution. On failure throws SweepPointError naming the index.
[[nodiscard]] std::vector<ElectromechState> evaluate_sweep(const ElectromechParams& params,
                                                           std::span<const double> forces,
                                                           const EvaluateOptions& options = {},
                                                           int* max_iterations_used = nullptr);

class SweepPointError : public Error {
public:
    SweepPointError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Forward model with parameters x = [E (Pa), nu], coordinates = forces (N),
/// field 1 = displacement d (m), field 2 = current I (A).
class ElectromechModel final : public ForwardModel {
public:
    explicit ElectromechModel(ElectromechParams constants = {}, EvaluateOptions options = {});

    [[nodiscard]] std::string name() const override { return "electromech"; }
    [[nodiscard]] std::size_t parameter_count() const override { return 2; }
    [[nodiscard]] std::size_t field_count() const override { return 2; }
    [[nodiscard]] std::size_t output_dim(FieldId field) const override;
    [[nodiscard]] std::vector<double> evaluate_field(std::span<const double> x, FieldId field,
                                                     std::span<const double> coordinates) const override;

    [[nodiscard]] const ElectromechParams& constants() const noexcept { return constants_; }
    [[nodiscard]] ElectromechParams with_parameters(std::span<const double> x) const;

private:
    ElectromechParams constants_;
    EvaluateOptions options_;
};

}  // namespace mpbia::electromech
