#pragma once

// Multi-field nonlinear algebraic systems and a monolithic Newton solver over
// their block-linearized form A(n) * dy(n+1) = -f(n).

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace mpbia {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Structural dependency pattern between the fields of a system.
enum class CouplingType {
    Uncoupled,  ///< all off-diagonal Jacobian blocks vanish
    OneWay,     ///< field i depends only on fields j <= i (block lower triangular)
    Full        ///< no structural zero blocks
};

[[nodiscard]] std::string_view to_string(CouplingType type) noexcept;
[[nodiscard]] CouplingType coupling_from_string(std::string_view name);

/// True when block (row_field, col_field) must be identically zero for `type`.
[[nodiscard]] constexpr bool is_structural_zero(CouplingType type, std::size_t row_field,
                                                std::size_t col_field) noexcept {
    switch (type) {
        case CouplingType::Uncoupled: return row_field != col_field;
        case CouplingType::OneWay: return col_field > row_field;
        case CouplingType::Full: return false;
    }
    return false;
}

/// Declarative bundle of stacked residuals and their Jacobian.
///
/// The state vector concatenates the fields in declaration order, primary field
/// first. `residual` must return the stacked f_1..f_m and `jacobian` the full
/// system matrix whose block (i, j) is df_i/dy_j. Callbacks must be pure.
struct CoupledSystem {
    std::vector<Index> field_dims;
    std::function<Vector(const Vector&)> residual;
    std::function<Matrix(const Vector&)> jacobian;
    CouplingType declared_coupling = CouplingType::Full;

    [[nodiscard]] std::size_t field_count() const noexcept { return field_dims.size(); }
    [[nodiscard]] Index size() const noexcept;
    [[nodiscard]] Index offset(std::size_t field) const;
};

struct NewtonSettings {
    /// Absolute bound on the Euclidean norm of the stacked residual.
    double residual_tolerance = 1e-12;
    int max_iterations = 50;
    Vector initial_state;
    /// Step halving when a full step does not reduce the residual norm.
    bool damping = false;
    int max_halvings = 30;

    /// Throws DomainError on tolerance <= 0 or max_iterations < 1.
    void validate() const;
};

struct NewtonResult {
    Vector state;
    int iterations = 0;
    /// Residual norm before each iteration and after the last one.
    std::vector<double> residual_norms;
};

/// Snapshot handed to an observer once per Newton iteration, after the step
/// has been computed and before it is applied.
struct NewtonIterate {
    int iteration;
    const Vector& state;
    const Vector& residual;
    const Matrix& jacobian;
    const Vector& step;
};

using NewtonObserver = std::function<void(const NewtonIterate&)>;

/// Evaluates the system matrix at `state` and checks it against the declaration.
///
/// Throws StructuralError if the state length, the residual length or the
/// Jacobian shape disagree with `field_dims`, or if a block that the declared
/// coupling type forces to zero is not exactly zero.
[[nodiscard]] Matrix assemble_block_jacobian(const CoupledSystem& system, const Vector& state);

/// Monolithic Newton iteration on the stacked residual.
///
/// Each correction solves A * dy = -f with a dense full-pivot LU. Returns the
/// initial state untouched (0 iterations) when it already satisfies the tolerance.
/// Throws SingularJacobianError, NonConvergenceError, or rethrows evaluation
/// failures (DomainError) with the iteration number prefixed.
[[nodiscard]] NewtonResult newton_solve(const CoupledSystem& system, const NewtonSettings& settings,
                                        const NewtonObserver& observer = {});

/// Field-by-field solve for Uncoupled and OneWay systems: Newton on the
/// diagonal block of field k with fields < k frozen at their solutions.
/// Reported iterations are summed over fields.
[[nodiscard]] NewtonResult solve_staggered(const CoupledSystem& system,
                                           const NewtonSettings& settings);

/// True iff every structural zero block of the declared coupling type is
/// exactly zero at every sampled state. A single-field system is vacuously true.
[[nodiscard]] bool verify_coupling_structure(const CoupledSystem& system,
                                             std::span<const Vector> sample_states);

}  // namespace mpbia
