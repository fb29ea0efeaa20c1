#include "mpbia/toy_full.hpp"

#include "mpbia/error.hpp"

#include <string>

namespace mpbia::toy {

CoupledSystem make_system(std::span<const double> x, double coordinate, double coupling) {
    if (x.size() != 2) throw StructuralError("toy model expects two parameters");
    const double load1 = (x[0] + x[1]) * coordinate;
    const double load2 = x[1] * coordinate;
    CoupledSystem system;
    system.field_dims = {1, 1};
    system.declared_coupling = CouplingType::Full;
    system.residual = [=](const Vector& y) {
        Vector f(2);
        f(0) = y(0) + 0.1 * y(0) * y(0) * y(0) + coupling * y(1) - load1;
        f(1) = y(1) - coupling * y(0) - load2;
        return f;
    };
    system.jacobian = [=](const Vector& y) {
        Matrix a(2, 2);
        a << 1.0 + 0.3 * y(0) * y(0), coupling, -coupling, 1.0;
        return a;
    };
    return system;
}

ToyFullModel::ToyFullModel(double coupling, double residual_tolerance)
    : coupling_(coupling), residual_tolerance_(residual_tolerance) {}

std::size_t ToyFullModel::output_dim(FieldId field) const {
    if (field != 1 && field != 2) {
        throw StructuralError("toy model has fields 1 and 2, got " + std::to_string(field));
    }
    return 1;
}

std::vector<double> ToyFullModel::evaluate_field(std::span<const double> x, FieldId field,
                                                 std::span<const double> coordinates) const {
    (void)output_dim(field);
    NewtonSettings settings;
    settings.residual_tolerance = residual_tolerance_;
    settings.initial_state = Vector::Zero(2);
    std::vector<double> out;
    out.reserve(coordinates.size());
    for (double c : coordinates) {
        const NewtonResult r = newton_solve(make_system(x, c, coupling_), settings);
        settings.initial_state = r.state;
        out.push_back(r.state(field - 1));
    }
    return out;
}

TruncatedNormalPrior toy_prior() {
    return TruncatedNormalPrior{
        .mean = {1.0, 1.0},
        .variance = {0.25, 0.25},
        .lower = {0.0, 0.0},
        .upper = {3.0, 3.0},
    };
}

}  // namespace mpbia::toy
