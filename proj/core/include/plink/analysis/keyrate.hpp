#pragma once

namespace plink::analysis {

// -x log2 x - (1-x) log2(1-x), with 0 log 0 := 0. Domain [0, 1].
double binary_entropy(double x);

// Pair-to-singles ratio C / sqrt(S1 * S2).
double heralding_efficiency(double coincidences_hz, double singles1_hz, double singles2_hz);

struct KeyRateEstimate {
  double coincidence_rate_hz = 0.0;
  double visibility = 0.0;
  double qber = 0.0;                        // e = (1 - V) / 2
  double error_correction_efficiency = 1.1; // f
  double sifting_factor = 1.0;
  double secret_fraction = 0.0;             // r = 1 - f h2(e) - h2(e), before clamping
  double key_rate_hz = 0.0;                 // C * sifting * max(0, r)
  bool below_threshold = false;             // r < 0, key rate clamped to zero
};

// Asymptotic BBM-92 key rate from the matched-basis coincidence rate and the
// fringe visibility. sifting = 1 matches the usual reporting convention for
// this measurement chain; 0.5 gives strict passive basis-choice accounting.
KeyRateEstimate bbm92_key_rate(double coincidence_rate_hz, double visibility,
                               double error_correction_efficiency, double sifting_factor = 1.0);

} // namespace plink::analysis
