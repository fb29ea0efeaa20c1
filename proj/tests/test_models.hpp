#pragma once

// Small analytic forward models shared by the test suites.

#include "mpbia/error.hpp"
#include "mpbia/forward_model.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace mpbia::testing {

/// Field 1: x0 + x1 c (scalar). Field 2: [x0 c, x1] (2-vector).
class AffineModel final : public ForwardModel {
public:
    [[nodiscard]] std::string name() const override { return "affine"; }
    [[nodiscard]] std::size_t parameter_count() const override { return 2; }
    [[nodiscard]] std::size_t field_count() const override { return 2; }
    [[nodiscard]] std::size_t output_dim(FieldId field) const override {
        if (field == 1) return 1;
        if (field == 2) return 2;
        throw StructuralError("affine model has fields 1 and 2");
    }
    [[nodiscard]] std::vector<double> evaluate_field(std::span<const double> x, FieldId field,
                                                     std::span<const double> coordinates) const override {
        std::vector<double> out;
        for (double c : coordinates) {
            if (field == 1) {
                out.push_back(x[0] + x[1] * c);
            } else {
                out.push_back(x[0] * c);
                out.push_back(x[1]);
            }
        }
        (void)output_dim(field);
        return out;
    }
};

/// Identity observation of parameter k: field k+1 returns x_k at every coordinate.
class IdentityModel final : public ForwardModel {
public:
    explicit IdentityModel(std::size_t dims) : dims_(dims) {}
    [[nodiscard]] std::string name() const override { return "identity"; }
    [[nodiscard]] std::size_t parameter_count() const override { return dims_; }
    [[nodiscard]] std::size_t field_count() const override { return dims_; }
    [[nodiscard]] std::size_t output_dim(FieldId) const override { return 1; }
    [[nodiscard]] std::vector<double> evaluate_field(std::span<const double> x, FieldId field,
                                                     std::span<const double> coordinates) const override {
        return std::vector<double>(coordinates.size(), x[static_cast<std::size_t>(field - 1)]);
    }

private:
    std::size_t dims_;
};

/// Throws a SolverError whenever x0 exceeds `limit`.
class FailingModel final : public ForwardModel {
public:
    explicit FailingModel(double limit) : limit_(limit) {}
    [[nodiscard]] std::string name() const override { return "failing"; }
    [[nodiscard]] std::size_t parameter_count() const override { return 2; }
    [[nodiscard]] std::size_t field_count() const override { return 1; }
    [[nodiscard]] std::size_t output_dim(FieldId) const override { return 1; }
    [[nodiscard]] std::vector<double> evaluate_field(std::span<const double> x, FieldId,
                                                     std::span<const double> coordinates) const override {
        if (x[0] > limit_) throw NonConvergenceError("no convergence above the limit", 7, 1.0);
        return std::vector<double>(coordinates.size(), x[0] + x[1]);
    }

private:
    double limit_;
};

}  // namespace mpbia::testing
