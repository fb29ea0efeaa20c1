#pragma once

namespace mpbia {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

[[nodiscard]] double normal_pdf(double z) noexcept;
[[nodiscard]] double normal_cdf(double z) noexcept;
/// Upper tail 1 - Phi(z), accurate for large positive z.
[[nodiscard]] double normal_ccdf(double z) noexcept;

/// Inverse standard-normal CDF (Wichura's AS241, relative error ~1e-16).
/// Returns -inf at p = 0, +inf at p = 1 and NaN outside [0, 1].
[[nodiscard]] double normal_quantile(double p) noexcept;

}  // namespace mpbia
