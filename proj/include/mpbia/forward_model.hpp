#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mpbia {

/// Field identifiers start at 1 (primary field).
using FieldId = int;

/// Parameter-to-observable map M_j(x, c) of a multi-field model.
///
/// Coordinates are scalar (a load value, a time, ...). Implementations must be
/// pure so that grid nodes can be evaluated concurrently.
class ForwardModel {
public:
    virtual ~ForwardModel() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::size_t parameter_count() const = 0;
    [[nodiscard]] virtual std::size_t field_count() const = 0;
    [[nodiscard]] virtual std::size_t output_dim(FieldId field) const = 0;

    /// Outputs of `field` at every coordinate, row-major [coordinate][component].
    /// Throws mpbia::Error subclasses when the model cannot be evaluated at `x`.
    [[nodiscard]] virtual std::vector<double> evaluate_field(std::span<const double> x, FieldId field,
                                                             std::span<const double> coordinates) const = 0;
};

}  // namespace mpbia
