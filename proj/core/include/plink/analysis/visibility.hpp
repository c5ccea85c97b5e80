#pragma once
#include <span>
#include <string>
#include <vector>

#include "plink/tsproc/coincidence.hpp"

namespace plink::analysis {

struct SinusoidFit {
  double offset = 0.0;       // A in A [1 + V cos(4 theta_hwp + phase)]
  double visibility = 0.0;   // V, clamped to [0, 1]
  double phase_deg = 0.0;
  double residual_rms = 0.0;
};

// Weighted linear least squares on the regressors {1, cos 4t, sin 4t} where
// t is the half-wave plate angle. Angles are HWP degrees; the fringe period
// is 90 degrees of HWP rotation. Throws on aliased (rank-deficient) angles
// or fewer than 6 distinct angles. Weights are 1/sigma^2 when sigmas are
// given, uniform otherwise.
SinusoidFit fit_sinusoid(std::span<const double> hwp_angles_deg,
                         std::span<const double> rates_hz,
                         std::span<const double> sigmas_hz = {});

// (C_max - C_min) / (C_max + C_min); requires C_max >= C_min >= 0, C_max > 0.
double visibility(double c_max, double c_min);

struct VisibilityResult {
  std::string basis;
  double amplitude_hz = 0.0; // fitted offset A of the raw fringe
  double phase_deg = 0.0;
  double v_raw = 0.0;
  double v_corr = 0.0;
  double c_max_hz = 0.0; // fitted raw extrema, V = (max-min)/(max+min) exactly
  double c_min_hz = 0.0;
  double accidental_hz = 0.0;
  double residual_rms = 0.0;
  bool clamped = false; // some corrected rates were clamped at zero
};

struct CorrectedScan {
  std::vector<double> corrected_rates_hz;
  SinusoidFit fit;
  bool clamped = false;
};

// Subtracts a flat accidental rate from every angle's rate (clamping at
// zero), then refits. Throws when the accidental exceeds the fitted raw
// maximum (degenerate correction).
CorrectedScan background_correct(std::span<const double> hwp_angles_deg,
                                 std::span<const double> rates_hz, double accidental_hz,
                                 std::span<const double> sigmas_hz = {});

struct GaussianPeakFit {
  double center_ps = 0.0;
  double fwhm_ps = 0.0;
  double amplitude = 0.0; // peak height above baseline
  double baseline = 0.0;  // flat background per bin
};

// Log-parabola fit around the histogram peak after flat-background removal;
// exact for a Gaussian peak on a flat floor.
GaussianPeakFit fit_gaussian_peak(const tsproc::CorrelationHistogram& histogram);

} // namespace plink::analysis
