#include "plink/analysis/keyrate.hpp"

#include <cmath>
#include <stdexcept>

namespace plink::analysis {

double binary_entropy(double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("binary entropy argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double heralding_efficiency(double coincidences_hz, double singles1_hz, double singles2_hz) {
  if (singles1_hz <= 0.0 || singles2_hz <= 0.0)
    throw std::invalid_argument("heralding needs positive singles rates");
  const double geometric_mean = std::sqrt(singles1_hz * singles2_hz);
  if (coincidences_hz > geometric_mean * (1.0 + 1e-12))
    throw std::invalid_argument("coincidence rate exceeds sqrt(S1*S2); inputs inconsistent");
  return coincidences_hz / geometric_mean;
}

KeyRateEstimate bbm92_key_rate(double coincidence_rate_hz, double visibility,
                               double error_correction_efficiency, double sifting_factor) {
  if (visibility < 0.0 || visibility > 1.0)
    throw std::invalid_argument("visibility outside [0, 1]");
  if (error_correction_efficiency < 1.0)
    throw std::invalid_argument("error correction efficiency must be >= 1");
  if (coincidence_rate_hz < 0.0) throw std::invalid_argument("coincidence rate must be >= 0");
  if (sifting_factor < 0.0 || sifting_factor > 1.0)
    throw std::invalid_argument("sifting factor outside [0, 1]");

  KeyRateEstimate out;
  out.coincidence_rate_hz = coincidence_rate_hz;
  out.visibility = visibility;
  out.error_correction_efficiency = error_correction_efficiency;
  out.sifting_factor = sifting_factor;
  out.qber = (1.0 - visibility) / 2.0;
  const double h = binary_entropy(out.qber);
  out.secret_fraction = 1.0 - error_correction_efficiency * h - h;
  out.below_threshold = out.secret_fraction < 0.0;
  out.key_rate_hz = coincidence_rate_hz * sifting_factor * std::max(0.0, out.secret_fraction);
  return out;
}

} // namespace plink::analysis
