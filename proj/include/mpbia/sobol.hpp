#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace mpbia {

/// One-dimensional Sobol' sequence in Gray-code order.
///
/// The first dimension of the Joe-Kuo direction-number set has m_k = 1 for
/// every k, so v_k = 2^-k and the sequence is the base-2 van der Corput
/// sequence visited in Gray-code order: 0, 1/2, 3/4, 1/4, 3/8, ...
class Sobol1D {
public:
    static constexpr int kBits = 52;

    Sobol1D() = default;

    /// Point at position `index` (index 0 is the origin).
    [[nodiscard]] static double point(std::uint64_t index) noexcept;

    /// Sequential generation (Antonov-Saleev update). The first call returns point(0).
    [[nodiscard]] double next() noexcept;

    [[nodiscard]] std::uint64_t position() const noexcept { return index_; }

private:
    std::uint64_t index_ = 0;
    std::uint64_t state_ = 0;
};

/// `n` standard-normal deviates: Sobol' points skip, skip+1, ... mapped
/// through the inverse normal CDF. With the default skip the origin (which
/// maps to -inf) is dropped and the first deviate is exactly 0.
[[nodiscard]] std::vector<double> sobol_standard_normal(std::size_t n, std::uint64_t skip = 1);

}  // namespace mpbia
