#pragma once
#include <cstdint>

namespace plink {

// All event timestamps are integer picoseconds.
using TimePs = std::int64_t;

inline constexpr double kSpeedOfLightMPerS = 2.99792458e8;
inline constexpr double kSpeedOfLightNmPerS = 2.99792458e17;

// FWHM = 2*sqrt(2*ln 2) * sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

inline constexpr double kPsPerSecond = 1e12;
inline constexpr double kPsPerNs = 1e3;
inline constexpr double kPsPerUs = 1e6;

constexpr double ps_to_seconds(TimePs t) { return static_cast<double>(t) / kPsPerSecond; }
constexpr double ns_to_seconds(double ns) { return ns * 1e-9; }

} // namespace plink
