#include "mpbia/electromech.hpp"

#include <cmath>
#include <string>

namespace mpbia::electromech {

namespace {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw DomainError(std::string("non-finite ") + what);
    }
}

double mech_slope(double d, double l0) { return 2.0 * l0 * l0 + 6.0 * l0 * d + 3.0 * d * d; }

/// Row scales that make f1 (m^3) and f2 (V m) dimensionless and of order one.
double mech_scale(const ElectromechParams& p) { return 1.0 / (p.side_length * p.side_length * p.side_length); }
double elec_scale(const ElectromechParams& p) { return 1.0 / (p.voltage * p.side_length * p.side_length); }

// Scalar Newton on f1, then on f2 with d frozen.
Evaluation solve_sequential(const ElectromechParams& params, double force, const EvaluateOptions& options,
                            const ElectromechState& guess) {
    const double field_tol = options.residual_tolerance / std::sqrt(2.0);
    const double l0 = params.side_length;
    const double s1 = mech_scale(params);
    const double s2 = elec_scale(params);
    Evaluation out;
    double d = guess.displacement;

    double r = s1 * residual_mech(d, params, force);
    while (std::abs(r) > field_tol) {
        if (out.iterations >= options.max_iterations) {
            throw NonConvergenceError("mechanical solve did not converge, last |f1| = " + std::to_string(std::abs(r)),
                                      out.iterations, std::abs(r));
        }
        const double slope = s1 * mech_slope(d, l0);
        if (slope == 0.0 || !std::isfinite(slope)) {
            throw SingularJacobianError("singular df1/dd at d = " + std::to_string(d), out.iterations, std::abs(r));
        }
        const double step = -r / slope;
        double trial = d + step;
        double r_trial = s1 * residual_mech(trial, params, force);
        if (options.damping) {
            double lambda = 1.0;
            int halvings = 0;
            while (!(std::abs(r_trial) < std::abs(r))) {
                if (++halvings > 30) {
                    throw NonConvergenceError("step halving exhausted in mechanical solve", out.iterations,
                                              std::abs(r));
                }
                lambda *= 0.5;
                trial = d + lambda * step;
                r_trial = s1 * residual_mech(trial, params, force);
            }
        }
        d = trial;
        r = r_trial;
        ++out.iterations;
    }
    if (d <= -l0) {
        throw DomainError("mechanical solve reached d <= -l0");
    }

    double current = guess.current;
    const double slope_i = s2 * params.resistivity * (l0 + d);
    double r2 = s2 * residual_elec(d, current, params);
    int elec_iterations = 0;
    while (std::abs(r2) > field_tol) {
        if (elec_iterations >= options.max_iterations) {
            throw NonConvergenceError("electrical solve did not converge", out.iterations, std::abs(r2));
        }
        current -= r2 / slope_i;
        r2 = s2 * residual_elec(d, current, params);
        ++elec_iterations;
    }
    out.iterations += elec_iterations;
    out.state = {d, current};
    return out;
}

Evaluation solve_monolithic(const ElectromechParams& params, double force, const EvaluateOptions& options,
                            const ElectromechState& guess) {
    NewtonSettings settings;
    settings.residual_tolerance = options.residual_tolerance;
    settings.max_iterations = options.max_iterations;
    settings.damping = options.damping;
    settings.initial_state = Vector(2);
    settings.initial_state << guess.displacement, guess.current;
    const NewtonResult result = newton_solve(make_system(params, force), settings);
    return {{result.state(0), result.state(1)}, result.iterations};
}

}  // namespace

void ElectromechParams::validate() const {
    require_finite(youngs_modulus, "Young's modulus");
    require_finite(poisson_ratio, "Poisson's ratio");
    require_finite(side_length, "side length");
    require_finite(voltage, "voltage");
    require_finite(resistivity, "resistivity");
    if (!(youngs_modulus > 0.0)) throw DomainError("Young's modulus must be positive");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) throw DomainError("Poisson's ratio must lie in [0, 0.5)");
    if (!(side_length > 0.0)) throw DomainError("side length must be positive");
    if (!(resistivity > 0.0)) throw DomainError("resistivity must be positive");
}

double residual_mech(double d, const ElectromechParams& params, double force) {
    require_finite(d, "displacement");
    require_finite(force, "force");
    const double l0 = params.side_length;
    const double nu = params.poisson_ratio;
    return 2.0 * l0 * l0 * d + 3.0 * l0 * d * d + d * d * d -
           2.0 * force * l0 / params.youngs_modulus * (1.0 - nu * nu);
}

double cross_section_radicand(double d, const ElectromechParams& params) {
    const double l0 = params.side_length;
    const double nu = params.poisson_ratio;
    return l0 * l0 - nu / (1.0 - nu) * (2.0 * l0 * d + d * d);
}

double residual_elec(double d, double current, const ElectromechParams& params) {
    require_finite(d, "displacement");
    require_finite(current, "current");
    const double radicand = cross_section_radicand(d, params);
    if (radicand < 0.0) {
        throw DomainError("non-physical lateral contraction: negative cross-section radicand at d = " +
                          std::to_string(d));
    }
    const double l0 = params.side_length;
    return params.resistivity * (l0 + d) * current - params.voltage * l0 * std::sqrt(radicand);
}

Eigen::Matrix2d jacobian(const ElectromechState& state, const ElectromechParams& params, double force) {
    require_finite(force, "force");
    const double d = state.displacement;
    const double radicand = cross_section_radicand(d, params);
    if (radicand < 0.0) {
        throw DomainError("non-physical lateral contraction: negative cross-section radicand at d = " +
                          std::to_string(d));
    }
    const double l0 = params.side_length;
    const double nu = params.poisson_ratio;
    // d/dd sqrt(R) = -(nu/(1-nu)) (2 l0 + 2 d) / (2 sqrt(R))
    const double dsqrt = -(nu / (1.0 - nu)) * (l0 + d) / std::sqrt(radicand);

    Eigen::Matrix2d a;
    a(0, 0) = mech_slope(d, l0);
    a(0, 1) = 0.0;
    a(1, 0) = params.resistivity * state.current - params.voltage * l0 * dsqrt;
    a(1, 1) = params.resistivity * (l0 + d);
    return a;
}

CoupledSystem make_system(const ElectromechParams& params, double force) {
    CoupledSystem system;
    system.field_dims = {1, 1};
    system.declared_coupling = CouplingType::OneWay;
    const double s1 = mech_scale(params);
    const double s2 = elec_scale(params);
    system.residual = [params, force, s1, s2](const Vector& y) {
        Vector f(2);
        f(0) = s1 * residual_mech(y(0), params, force);
        f(1) = s2 * residual_elec(y(0), y(1), params);
        return f;
    };
    system.jacobian = [params, force, s1, s2](const Vector& y) {
        Matrix a = jacobian({y(0), y(1)}, params, force);
        a.row(0) *= s1;
        a.row(1) *= s2;
        return a;
    };
    return system;
}

double current_for_displacement(double d, const ElectromechParams& params) {
    const double radicand = cross_section_radicand(d, params);
    if (radicand < 0.0) {
        throw DomainError("non-physical lateral contraction: negative cross-section radicand");
    }
    const double l0 = params.side_length;
    return params.voltage * l0 * std::sqrt(radicand) / (params.resistivity * (l0 + d));
}

ElectromechState undeformed_state(const ElectromechParams& params) {
    return {0.0, params.voltage * params.side_length / params.resistivity};
}

Evaluation evaluate(const ElectromechParams& params, double force, const EvaluateOptions& options) {
    params.validate();
    require_finite(force, "force");
    if (force < 0.0) {
        throw DomainError("force must be non-negative");
    }
    const ElectromechState guess = options.initial_guess.value_or(undeformed_state(params));
    if (options.mode == SolveMode::Monolithic) {
        return solve_monolithic(params, force, options, guess);
    }
    return solve_sequential(params, force, options, guess);
}

std::vector<ElectromechState> evaluate_sweep(const ElectromechParams& params, std::span<const double> forces,
                                             const EvaluateOptions& options, int* max_iterations_used) {
    std::vector<ElectromechState> states;
    states.reserve(forces.size());
    EvaluateOptions point_options = options;
    int max_used = 0;
    for (std::size_t i = 0; i < forces.size(); ++i) {
        try {
            const Evaluation e = evaluate(params, forces[i], point_options);
            states.push_back(e.state);
            max_used = std::max(max_used, e.iterations);
            point_options.initial_guess = e.state;
        } catch (const Error& e) {
            throw SweepPointError("force index " + std::to_string(i) + " (F = " + std::to_string(forces[i]) +
                                      " N): " + e.what(),
                                  i);
        }
    }
    if (max_iterations_used != nullptr) {
        *max_iterations_used = max_used;
    }
    return states;
}

ElectromechModel::ElectromechModel(ElectromechParams constants, EvaluateOptions options)
    : constants_(constants), options_(std::move(options)) {
    constants_.validate();
}

std::size_t ElectromechModel::output_dim(FieldId field) const {
    if (field != 1 && field != 2) {
        throw StructuralError("electromech model has fields 1 and 2, got " + std::to_string(field));
    }
    return 1;
}

ElectromechParams ElectromechModel::with_parameters(std::span<const double> x) const {
    if (x.size() != 2) {
        throw StructuralError("electromech model expects parameters [E, nu]");
    }
    ElectromechParams p = constants_;
    p.youngs_modulus = x[0];
    p.poisson_ratio = x[1];
    return p;
}

std::vector<double> ElectromechModel::evaluate_field(std::span<const double> x, FieldId field,
                                                     std::span<const double> coordinates) const {
    (void)output_dim(field);
    const std::vector<ElectromechState> states = evaluate_sweep(with_parameters(x), coordinates, options_);
    std::vector<double> out;
    out.reserve(states.size());
    for (const ElectromechState& s : states) {
        out.push_back(field == 1 ? s.displacement : s.current);
    }
    return out;
}

}  // namespace mpbia::electromech
