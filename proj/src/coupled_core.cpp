#include "mpbia/coupled_core.hpp"

#include "mpbia/error.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mpbia {

namespace {

std::string at_iteration(int iteration, const std::string& what) {
    return "newton iteration " + std::to_string(iteration) + ": " + what;
}

void check_dims(const CoupledSystem& system) {
    if (system.field_dims.empty()) {
        throw StructuralError("coupled system declares no fields");
    }
    for (Index dim : system.field_dims) {
        if (dim <= 0) {
            throw StructuralError("field dimensions must be positive");
        }
    }
    if (!system.residual || !system.jacobian) {
        throw StructuralError("coupled system is missing a residual or Jacobian callback");
    }
}

Vector eval_residual(const CoupledSystem& system, const Vector& state, int iteration) {
    Vector f;
    try {
        f = system.residual(state);
    } catch (const DomainError& e) {
        throw DomainError(at_iteration(iteration, e.what()));
    }
    if (f.size() != system.size()) {
        throw StructuralError(at_iteration(iteration, "residual has length " + std::to_string(f.size()) +
                                                          ", expected " + std::to_string(system.size())));
    }
    return f;
}

Matrix eval_jacobian(const CoupledSystem& system, const Vector& state, int iteration) {
    try {
        return assemble_block_jacobian(system, state);
    } catch (const DomainError& e) {
        throw DomainError(at_iteration(iteration, e.what()));
    }
}

// Newton loop shared by the monolithic and the per-field solve. `residual_of`
// and `jacobian_of` act on the unknowns being iterated.
template <typename ResidualFn, typename JacobianFn>
NewtonResult newton_loop(const Vector& initial, const NewtonSettings& settings, ResidualFn&& residual_of,
                         JacobianFn&& jacobian_of, const NewtonObserver& observer) {
    NewtonResult result;
    result.state = initial;

    Vector f = residual_of(result.state, 0);
    double norm = f.norm();
    result.residual_norms.push_back(norm);
    if (!std::isfinite(norm)) {
        throw SolverError(at_iteration(0, "non-finite residual at initial state"), 0, norm);
    }

    Eigen::FullPivLU<Matrix> lu;
    while (norm > settings.residual_tolerance) {
        if (result.iterations >= settings.max_iterations) {
            throw NonConvergenceError("newton solve did not converge in " + std::to_string(settings.max_iterations) +
                                          " iterations, last residual norm " + std::to_string(norm),
                                      result.iterations, norm);
        }
        const int n = result.iterations;
        Matrix a = jacobian_of(result.state, n);
        if (!a.allFinite()) {
            throw SingularJacobianError(at_iteration(n, "non-finite Jacobian"), n, norm);
        }
        lu.compute(a);
        if (!lu.isInvertible()) {
            throw SingularJacobianError(at_iteration(n, "singular Jacobian"), n, norm);
        }
        Vector step = lu.solve(-f);
        if (observer) {
            observer(NewtonIterate{n, result.state, f, a, step});
        }

        double lambda = 1.0;
        Vector trial = result.state + step;
        Vector f_trial;
        if (settings.damping) {
            int halvings = 0;
            for (;;) {
                bool ok = true;
                try {
                    f_trial = residual_of(trial, n + 1);
                } catch (const DomainError&) {
                    ok = false;
                }
                if (ok && std::isfinite(f_trial.norm()) && f_trial.norm() < norm) {
                    break;
                }
                if (++halvings > settings.max_halvings) {
                    throw NonConvergenceError(at_iteration(n, "step halving exhausted"), n, norm);
                }
                lambda *= 0.5;
                trial = result.state + lambda * step;
            }
        } else {
            f_trial = residual_of(trial, n + 1);
        }

        result.state = std::move(trial);
        f = std::move(f_trial);
        norm = f.norm();
        ++result.iterations;
        result.residual_norms.push_back(norm);
        if (!std::isfinite(norm)) {
            throw SolverError(at_iteration(result.iterations, "non-finite residual"), result.iterations, norm);
        }
    }
    return result;
}

}  // namespace

std::string_view to_string(CouplingType type) noexcept {
    switch (type) {
        case CouplingType::Uncoupled: return "uncoupled";
        case CouplingType::OneWay: return "one-way";
        case CouplingType::Full: return "full";
    }
    return "unknown";
}

CouplingType coupling_from_string(std::string_view name) {
    if (name == "uncoupled") return CouplingType::Uncoupled;
    if (name == "one-way") return CouplingType::OneWay;
    if (name == "full") return CouplingType::Full;
    throw DomainError("unknown coupling type '" + std::string(name) + "'");
}

Index CoupledSystem::size() const noexcept {
    return std::accumulate(field_dims.begin(), field_dims.end(), Index{0});
}

Index CoupledSystem::offset(std::size_t field) const {
    if (field >= field_dims.size()) {
        throw StructuralError("field index out of range");
    }
    return std::accumulate(field_dims.begin(), field_dims.begin() + static_cast<std::ptrdiff_t>(field), Index{0});
}

void NewtonSettings::validate() const {
    if (!(residual_tolerance > 0.0)) {
        throw DomainError("newton residual tolerance must be positive");
    }
    if (max_iterations < 1) {
        throw DomainError("newton max_iterations must be at least 1");
    }
    if (max_halvings < 0) {
        throw DomainError("newton max_halvings must be non-negative");
    }
}

Matrix assemble_block_jacobian(const CoupledSystem& system, const Vector& state) {
    check_dims(system);
    const Index n = system.size();
    if (state.size() != n) {
        throw StructuralError("state has length " + std::to_string(state.size()) + ", system expects " +
                              std::to_string(n));
    }
    Matrix a = system.jacobian(state);
    if (a.rows() != n || a.cols() != n) {
        throw StructuralError("jacobian is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              ", expected " + std::to_string(n) + "x" + std::to_string(n));
    }
    for (std::size_t i = 0; i < system.field_count(); ++i) {
        for (std::size_t j = 0; j < system.field_count(); ++j) {
            if (!is_structural_zero(system.declared_coupling, i, j)) continue;
            auto block = a.block(system.offset(i), system.offset(j), system.field_dims[i], system.field_dims[j]);
            if ((block.array() != 0.0).any()) {
                throw StructuralError("jacobian block (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") must vanish for a " + std::string(to_string(system.declared_coupling)) +
                                      " system");
            }
        }
    }
    return a;
}

NewtonResult newton_solve(const CoupledSystem& system, const NewtonSettings& settings,
                          const NewtonObserver& observer) {
    settings.validate();
    check_dims(system);
    if (settings.initial_state.size() != system.size()) {
        throw StructuralError("initial state has length " + std::to_string(settings.initial_state.size()) +
                              ", system expects " + std::to_string(system.size()));
    }
    return newton_loop(
        settings.initial_state, settings,
        [&](const Vector& y, int it) { return eval_residual(system, y, it); },
        [&](const Vector& y, int it) { return eval_jacobian(system, y, it); }, observer);
}

NewtonResult solve_staggered(const CoupledSystem& system, const NewtonSettings& settings) {
    settings.validate();
    check_dims(system);
    if (system.declared_coupling == CouplingType::Full) {
        throw StructuralError("staggered solve requires an uncoupled or one-way coupled system");
    }
    if (settings.initial_state.size() != system.size()) {
        throw StructuralError("initial state has length " + std::to_string(settings.initial_state.size()) +
                              ", system expects " + std::to_string(system.size()));
    }

    // Per-field tolerance keeps the stacked norm within the requested bound.
    NewtonSettings field_settings = settings;
    field_settings.residual_tolerance =
        settings.residual_tolerance / std::sqrt(static_cast<double>(system.field_count()));

    NewtonResult total;
    Vector state = settings.initial_state;
    for (std::size_t k = 0; k < system.field_count(); ++k) {
        const Index off = system.offset(k);
        const Index dim = system.field_dims[k];
        auto embed = [&](const Vector& yk) {
            Vector full = state;
            full.segment(off, dim) = yk;
            return full;
        };
        NewtonResult field = newton_loop(
            state.segment(off, dim), field_settings,
            [&](const Vector& yk, int it) { return Vector(eval_residual(system, embed(yk), it).segment(off, dim)); },
            [&](const Vector& yk, int it) {
                return Matrix(eval_jacobian(system, embed(yk), it).block(off, off, dim, dim));
            },
            {});
        state.segment(off, dim) = field.state;
        total.iterations += field.iterations;
    }
    total.state = std::move(state);
    total.residual_norms.push_back(eval_residual(system, total.state, total.iterations).norm());
    return total;
}

bool verify_coupling_structure(const CoupledSystem& system, std::span<const Vector> sample_states) {
    check_dims(system);
    if (sample_states.empty()) {
        throw DomainError("verify_coupling_structure needs at least one sample state");
    }
    const double eps = std::numeric_limits<double>::epsilon();
    for (const Vector& state : sample_states) {
        if (state.size() != system.size()) {
            throw StructuralError("sample state has wrong length");
        }
        const Matrix a = system.jacobian(state);
        if (a.rows() != system.size() || a.cols() != system.size()) {
            throw StructuralError("jacobian shape does not match field dimensions");
        }
        const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        for (std::size_t i = 0; i < system.field_count(); ++i) {
            for (std::size_t j = 0; j < system.field_count(); ++j) {
                if (!is_structural_zero(system.declared_coupling, i, j)) continue;
                auto block = a.block(system.offset(i), system.offset(j), system.field_dims[i], system.field_dims[j]);
                if (block.cwiseAbs().maxCoeff() > eps * scale) {
                    return false;
                }
            }
        }
    }
    return true;
}

}  // namespace mpbia
