#include "plink/analysis/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plink::analysis {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

// Solve the 3x3 normal equations by Gaussian elimination with partial
// pivoting; throws when the design is rank deficient.
void solve3(double m[3][3], double rhs[3], double out[3]) {
  double scale = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(m[r][c]));
  if (scale <= 0.0)
    throw std::invalid_argument("sinusoid fit is rank deficient: scan angles are aliased");
  int index[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[index[r]][col]) > std::abs(m[index[pivot]][col])) pivot = r;
    std::swap(index[col], index[pivot]);
    const double diag = m[index[col]][col];
    if (std::abs(diag) < 1e-12 * scale)
      throw std::invalid_argument("sinusoid fit is rank deficient: scan angles are aliased");
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[index[r]][col] / diag;
      for (int c = col; c < 3; ++c) m[index[r]][c] -= f * m[index[col]][c];
      rhs[index[r]] -= f * rhs[index[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double v = rhs[index[col]];
    for (int c = col + 1; c < 3; ++c) v -= m[index[col]][c] * out[c];
    out[col] = v / m[index[col]][col];
  }
}

} // namespace

SinusoidFit fit_sinusoid(std::span<const double> hwp_angles_deg, std::span<const double> rates_hz,
                         std::span<const double> sigmas_hz) {
  const std::size_t n = hwp_angles_deg.size();
  if (rates_hz.size() != n)
    throw std::invalid_argument("angles and rates must have the same length");
  if (!sigmas_hz.empty() && sigmas_hz.size() != n)
    throw std::invalid_argument("sigmas must match the number of angles");

  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j)
      seen = std::abs(hwp_angles_deg[i] - hwp_angles_deg[j]) < 1e-9;
    if (!seen) ++distinct;
  }
  if (distinct < 6)
    throw std::invalid_argument("sinusoid fit needs at least 6 distinct scan angles");

  // weighted LSQ on y = c0 + c1 cos(4t) + c2 sin(4t)
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigmas_hz.empty() ? 1.0 : 1.0 / (sigmas_hz[i] * sigmas_hz[i]);
    const double t = 4.0 * hwp_angles_deg[i] * kDegToRad;
    const double reg[3] = {1.0, std::cos(t), std::sin(t)};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += w * reg[r] * reg[c];
      rhs[r] += w * reg[r] * rates_hz[i];
    }
  }
  double coeff[3];
  solve3(m, rhs, coeff);

  SinusoidFit fit;
  fit.offset = coeff[0];
  const double amplitude = std::hypot(coeff[1], coeff[2]);
  fit.visibility = fit.offset > 0.0 ? std::clamp(amplitude / fit.offset, 0.0, 1.0) : 0.0;
  // c1 = A V cos(phase), c2 = -A V sin(phase)
  fit.phase_deg = amplitude > 0.0 ? std::atan2(-coeff[2], coeff[1]) / kDegToRad : 0.0;

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 4.0 * hwp_angles_deg[i] * kDegToRad;
    const double predicted = coeff[0] + coeff[1] * std::cos(t) + coeff[2] * std::sin(t);
    ss += (rates_hz[i] - predicted) * (rates_hz[i] - predicted);
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

double visibility(double c_max, double c_min) {
  if (c_min < 0.0 || c_max < c_min) throw std::invalid_argument("need C_max >= C_min >= 0");
  if (c_max <= 0.0) throw std::invalid_argument("visibility undefined for C_max = 0");
  return (c_max - c_min) / (c_max + c_min);
}

CorrectedScan background_correct(std::span<const double> hwp_angles_deg,
                                 std::span<const double> rates_hz, double accidental_hz,
                                 std::span<const double> sigmas_hz) {
  if (accidental_hz < 0.0) throw std::invalid_argument("accidental rate must be >= 0");
  const auto raw = fit_sinusoid(hwp_angles_deg, rates_hz, sigmas_hz);
  const double raw_max = raw.offset * (1.0 + raw.visibility);
  if (accidental_hz >= raw_max)
    throw std::invalid_argument("accidental rate exceeds the fitted maximum; correction degenerate");

  CorrectedScan out;
  out.corrected_rates_hz.reserve(rates_hz.size());
  for (double r : rates_hz) {
    const double corrected = r - accidental_hz;
    if (corrected < 0.0) out.clamped = true;
    out.corrected_rates_hz.push_back(std::max(corrected, 0.0));
  }
  out.fit = fit_sinusoid(hwp_angles_deg, out.corrected_rates_hz, sigmas_hz);
  return out;
}

GaussianPeakFit fit_gaussian_peak(const tsproc::CorrelationHistogram& histogram) {
  const auto& counts = histogram.counts;
  if (counts.size() < 8) throw std::invalid_argument("histogram too small for a peak fit");

  // flat background from the outer 20% of bins on each side
  const std::size_t edge = std::max<std::size_t>(counts.size() / 5, 2);
  double baseline = 0.0;
  for (std::size_t i = 0; i < edge; ++i)
    baseline += static_cast<double>(counts[i]) + static_cast<double>(counts[counts.size() - 1 - i]);
  baseline /= static_cast<double>(2 * edge);

  std::size_t peak = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[peak]) peak = i;
  const double peak_height = static_cast<double>(counts[peak]) - baseline;
  if (peak_height <= 0.0)
    throw std::invalid_argument("histogram has no peak above the background");

  // log-parabola over contiguous bins above half maximum
  const double half = baseline + peak_height / 2.0;
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && static_cast<double>(counts[lo - 1]) > half) --lo;
  while (hi + 1 < counts.size() && static_cast<double>(counts[hi + 1]) > half) ++hi;
  if (hi - lo + 1 < 3) {
    lo = peak > 0 ? peak - 1 : 0;
    hi = std::min(peak + 1, counts.size() - 1);
  }

  double sx = 0, sx2 = 0, sx3 = 0, sx4 = 0, sy = 0, sxy = 0, sx2y = 0;
  double npts = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double y = static_cast<double>(counts[i]) - baseline;
    if (y <= 0.0) continue;
    const double x = histogram.bin_center_ps(i);
    const double ly = std::log(y);
    npts += 1;
    sx += x;
    sx2 += x * x;
    sx3 += x * x * x;
    sx4 += x * x * x * x;
    sy += ly;
    sxy += x * ly;
    sx2y += x * x * ly;
  }
  if (npts < 3) throw std::invalid_argument("too few bins above half maximum for a peak fit");

  // normal equations for ly = a + b x + c x^2
  double m[3][3] = {{npts, sx, sx2}, {sx, sx2, sx3}, {sx2, sx3, sx4}};
  double rhs[3] = {sy, sxy, sx2y};
  double coeff[3];
  solve3(m, rhs, coeff);
  if (coeff[2] >= 0.0) throw std::invalid_argument("peak fit did not converge to a maximum");

  GaussianPeakFit fit;
  const double sigma2 = -1.0 / (2.0 * coeff[2]);
  fit.center_ps = coeff[1] * sigma2;
  fit.fwhm_ps = 2.3548200450309493 * std::sqrt(sigma2);
  fit.amplitude = std::exp(coeff[0] + fit.center_ps * fit.center_ps / (2.0 * sigma2));
  fit.baseline = baseline;
  return fit;
}

} // namespace plink::analysis
