#pragma once
#include "plink/model/params.hpp"

namespace plink::model {

// Closed-form rate prediction for a scenario. Singles are reported after the
// non-paralyzable dead-time correction; live_time_* are the applied live
// fractions (observed / raw).
struct RatePrediction {
  double singles_signal_hz = 0.0;
  double singles_idler_hz = 0.0;
  double true_coincidences_hz = 0.0;
  double accidental_coincidences_hz = 0.0;
  double total_coincidences_hz = 0.0;
  double window_acceptance = 1.0;
  double live_time_signal = 1.0;
  double live_time_idler = 1.0;
};

// Joint probability that both photons of a |Phi-> pair pass polarizers at
// angles alpha (signal) and beta (idler):
//   p = 1/4 * [1 + V_hv cos2a cos2b - V_da sin2a sin2b]
// Reduces to cos^2(a+b)/2 for unit visibilities.
double coincidence_probability(double signal_angle_deg, double idler_angle_deg,
                               double v_hv, double v_da);

RatePrediction expected_rates(const LinkScenario& scenario);

// Poisson estimate of uncorrelated coincidences: S1 * S2 * tau_c.
double accidental_rate(double singles1_hz, double singles2_hz, double window_ns);

// One-way group delay L * n_g / c, in microseconds.
double propagation_delay_us(const FiberParams& fiber);

// Temporal FWHM broadening of a bandwidth-limited pulse after the fiber, in ps.
// First-order |D(lambda)| * dlambda * L combined in quadrature with the
// second-order bound S0 * dlambda^2 * L / 8, so the result is nonzero for
// finite bandwidth even exactly at the zero-dispersion wavelength.
double chromatic_broadening_ps(const FiberParams& fiber, double center_wavelength_nm,
                               double bandwidth_fwhm_nm);

// Dispersion coefficient D(lambda) in ps/(nm km).
double dispersion_coefficient(const FiberParams& fiber, double wavelength_nm);

// Linear crystal-temperature tuning of the signal wavelength.
double signal_wavelength_nm(double temperature_c, const SourceParams& source);

// Calibrated range of the temperature tuning curve.
inline constexpr double kTuningRangeMinC = 25.0;
inline constexpr double kTuningRangeMaxC = 45.0;
bool temperature_in_calibrated_range(double temperature_c);

// sqrt(measured^2 - resolution^2); throws if measured < resolution.
double gaussian_deconvolve(double measured_fwhm, double resolution_fwhm);

// c * dlambda / lambda^2, in GHz.
double bandwidth_to_frequency_ghz(double delta_lambda_nm, double center_wavelength_nm);

// Fraction of a Gaussian time-difference distribution with
// FWHM = sqrt(j1^2 + j2^2 + pair^2) captured by a centered window.
double window_acceptance(double jitter1_fwhm_ps, double jitter2_fwhm_ps,
                         double pair_fwhm_ps, double window_ns);

// Power transmission of the fiber including extra_loss_db.
double fiber_transmission(const FiberParams& fiber);

// Observed rate of a Poisson process through a non-paralyzable dead time:
// R / (1 + R * tau_d).
double deadtime_observed_rate(double rate_hz, double dead_time_ns);

} // namespace plink::model
