#include "mpbia/sobol.hpp"

#include "mpbia/normal.hpp"

#include <bit>
#include <cmath>

namespace mpbia {

namespace {

// v_k as integers scaled by 2^kBits.
constexpr std::array<std::uint64_t, Sobol1D::kBits> make_directions() {
    std::array<std::uint64_t, Sobol1D::kBits> v{};
    for (int k = 0; k < Sobol1D::kBits; ++k) {
        v[static_cast<std::size_t>(k)] = std::uint64_t{1} << (Sobol1D::kBits - 1 - k);
    }
    return v;
}

constexpr auto kDirections = make_directions();
constexpr double kScale = 1.0 / static_cast<double>(std::uint64_t{1} << Sobol1D::kBits);

}  // namespace

double Sobol1D::point(std::uint64_t index) noexcept {
    std::uint64_t gray = index ^ (index >> 1);
    std::uint64_t x = 0;
    for (std::size_t k = 0; gray != 0 && k < kDirections.size(); ++k, gray >>= 1) {
        if (gray & 1U) x ^= kDirections[k];
    }
    return static_cast<double>(x) * kScale;
}

double Sobol1D::next() noexcept {
    const double out = static_cast<double>(state_) * kScale;
    // Flip the direction number at the lowest zero bit of the current index.
    const auto c = static_cast<std::size_t>(std::countr_one(index_));
    if (c < kDirections.size()) state_ ^= kDirections[c];
    ++index_;
    return out;
}

std::vector<double> sobol_standard_normal(std::size_t n, std::uint64_t skip) {
    std::vector<double> z;
    z.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        z.push_back(normal_quantile(Sobol1D::point(skip + i)));
    }
    return z;
}

}  // namespace mpbia
