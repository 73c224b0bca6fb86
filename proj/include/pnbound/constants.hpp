#pragma once

#include <numbers>

namespace pnbound {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Propagation speed used for range/velocity conversions. The rounded value
// matches the usual simulation convention (R = 50 m <-> 333.33 ns).
inline constexpr double kSpeedOfLight = 3.0e8;

} // namespace pnbound
