#pragma once

// Small fully coupled two-field fixture used to exercise the fully coupled
// solver path and the SNR1 x SNR2 x coupling-strength sweep:
//
//   f1 = y1 + 0.1 y1^3 + k y2 - (x1 + x2) c
//   f2 = y2 - k y1 - x2 c
//
// Field 1 alone only constrains a combination of x1 and x2; the coupling k
// controls how strongly field 2 feeds back into field 1.

#include "mpbia/coupled_core.hpp"
#include "mpbia/forward_model.hpp"
#include "mpbia/probabilistic.hpp"

namespace mpbia::toy {

[[nodiscard]] CoupledSystem make_system(std::span<const double> x, double coordinate, double coupling);

class ToyFullModel final : public ForwardModel {
public:
    explicit ToyFullModel(double coupling = 0.5, double residual_tolerance = 1e-12);

    [[nodiscard]] std::string name() const override { return "toy-full"; }
    [[nodiscard]] std::size_t parameter_count() const override { return 2; }
    [[nodiscard]] std::size_t field_count() const override { return 2; }
    [[nodiscard]] std::size_t output_dim(FieldId field) const override;
    [[nodiscard]] std::vector<double> evaluate_field(std::span<const double> x, FieldId field,
                                                     std::span<const double> coordinates) const override;

    [[nodiscard]] double coupling() const noexcept { return coupling_; }

private:
    double coupling_;
    double residual_tolerance_;
};

/// TN(mean [1, 1], sd [0.5, 0.5], bounds [0, 0] to [3, 3]).
[[nodiscard]] TruncatedNormalPrior toy_prior();

/// Ground truth used by the built-in toy configurations.
inline constexpr double kToyTruth[2] = {1.2, 0.8};

}  // namespace mpbia::toy
