#include "plink/model/optics.hpp"

#include <cmath>
#include <stdexcept>

#include "plink/units.hpp"

namespace plink::model {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

double coincidence_probability(double signal_angle_deg, double idler_angle_deg, double v_hv,
                               double v_da) {
  if (v_hv < 0.0 || v_hv > 1.0 || v_da < 0.0 || v_da > 1.0)
    throw std::invalid_argument("visibility must be within [0, 1]");
  const double a2 = 2.0 * signal_angle_deg * kDegToRad;
  const double b2 = 2.0 * idler_angle_deg * kDegToRad;
  const double p =
      0.25 * (1.0 + v_hv * std::cos(a2) * std::cos(b2) - v_da * std::sin(a2) * std::sin(b2));
  // clip the tiny negative excursions from rounding
  return p < 0.0 ? 0.0 : p;
}

double accidental_rate(double singles1_hz, double singles2_hz, double window_ns) {
  if (singles1_hz < 0.0 || singles2_hz < 0.0) throw std::invalid_argument("rates must be >= 0");
  return singles1_hz * singles2_hz * ns_to_seconds(window_ns);
}

double fiber_transmission(const FiberParams& fiber) {
  const double loss_db = fiber.attenuation_db_per_km * fiber.length_km + fiber.extra_loss_db;
  return std::pow(10.0, -loss_db / 10.0);
}

double propagation_delay_us(const FiberParams& fiber) {
  return fiber.length_km * 1e3 * fiber.group_index / kSpeedOfLightMPerS * 1e6;
}

double dispersion_coefficient(const FiberParams& fiber, double wavelength_nm) {
  const double l0 = fiber.zero_dispersion_wavelength_nm;
  const double l = wavelength_nm;
  return fiber.dispersion_slope_ps_per_nm2_km / 4.0 * (l - l0 * l0 * l0 * l0 / (l * l * l));
}

double chromatic_broadening_ps(const FiberParams& fiber, double center_wavelength_nm,
                               double bandwidth_fwhm_nm) {
  if (bandwidth_fwhm_nm <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
  const double first = std::abs(dispersion_coefficient(fiber, center_wavelength_nm)) *
                       bandwidth_fwhm_nm * fiber.length_km;
  const double second = fiber.dispersion_slope_ps_per_nm2_km * bandwidth_fwhm_nm *
                        bandwidth_fwhm_nm * fiber.length_km / 8.0;
  return std::hypot(first, second);
}

double signal_wavelength_nm(double temperature_c, const SourceParams& source) {
  return source.reference_wavelength_nm +
         source.wavelength_temperature_slope_nm_per_k *
             (temperature_c - source.reference_temperature_c);
}

bool temperature_in_calibrated_range(double temperature_c) {
  return temperature_c >= kTuningRangeMinC && temperature_c <= kTuningRangeMaxC;
}

double gaussian_deconvolve(double measured_fwhm, double resolution_fwhm) {
  if (resolution_fwhm < 0.0) throw std::invalid_argument("resolution must be >= 0");
  if (measured_fwhm < resolution_fwhm)
    throw std::invalid_argument("measured width below instrument resolution");
  return std::sqrt(measured_fwhm * measured_fwhm - resolution_fwhm * resolution_fwhm);
}

double bandwidth_to_frequency_ghz(double delta_lambda_nm, double center_wavelength_nm) {
  if (delta_lambda_nm < 0.0 || center_wavelength_nm <= 0.0)
    throw std::invalid_argument("spectral inputs must be positive");
  return kSpeedOfLightNmPerS * delta_lambda_nm /
         (center_wavelength_nm * center_wavelength_nm) / 1e9;
}

double window_acceptance(double jitter1_fwhm_ps, double jitter2_fwhm_ps, double pair_fwhm_ps,
                         double window_ns) {
  if (window_ns <= 0.0) throw std::invalid_argument("window must be > 0");
  const double fwhm = std::sqrt(jitter1_fwhm_ps * jitter1_fwhm_ps +
                                jitter2_fwhm_ps * jitter2_fwhm_ps + pair_fwhm_ps * pair_fwhm_ps);
  if (fwhm <= 0.0) return 1.0; // delta distribution
  const double sigma = fwhm / kFwhmPerSigma;
  const double half_window_ps = window_ns * kPsPerNs / 2.0;
  return std::erf(half_window_ps / (std::sqrt(2.0) * sigma));
}

double deadtime_observed_rate(double rate_hz, double dead_time_ns) {
  return rate_hz / (1.0 + rate_hz * ns_to_seconds(dead_time_ns));
}

RatePrediction expected_rates(const LinkScenario& scenario) {
  scenario.validate();
  const auto& src = scenario.source;
  const double pair_rate = src.brightness_pairs_per_s_per_mw * src.pump_power_mw;

  const double eta_signal = scenario.path_efficiency_signal * fiber_transmission(scenario.fiber) *
                            scenario.detector_signal.efficiency;
  const double eta_idler = scenario.path_efficiency_idler * scenario.detector_idler.efficiency;

  // polarizer marginal is 1/2 per arm regardless of angle or visibility
  double marginal = 1.0;
  double joint = 1.0;
  if (scenario.analyzer) {
    marginal = 0.5;
    joint = coincidence_probability(scenario.analyzer->signal_angle_deg,
                                    scenario.analyzer->idler_angle_deg,
                                    src.intrinsic_visibility_hv, src.intrinsic_visibility_da);
  }

  const double dispersion_ps =
      scenario.fiber.length_km > 0.0
          ? chromatic_broadening_ps(scenario.fiber, src.signal_center_wavelength_nm,
                                    src.signal_bandwidth_fwhm_nm)
          : 0.0;
  const double pair_spread_ps =
      std::hypot(src.pair_correlation_fwhm_ps, dispersion_ps);
  const double acceptance =
      window_acceptance(scenario.detector_signal.jitter_fwhm_ps,
                        scenario.detector_idler.jitter_fwhm_ps, pair_spread_ps,
                        scenario.coincidence_window_ns);

  const double raw_signal =
      pair_rate * eta_signal * marginal + scenario.detector_signal.dark_rate_hz;
  const double raw_idler =
      pair_rate * eta_idler * marginal + scenario.detector_idler.dark_rate_hz;

  RatePrediction out;
  out.window_acceptance = acceptance;
  out.singles_signal_hz =
      deadtime_observed_rate(raw_signal, scenario.detector_signal.dead_time_ns);
  out.singles_idler_hz = deadtime_observed_rate(raw_idler, scenario.detector_idler.dead_time_ns);
  out.live_time_signal = raw_signal > 0.0 ? out.singles_signal_hz / raw_signal : 1.0;
  out.live_time_idler = raw_idler > 0.0 ? out.singles_idler_hz / raw_idler : 1.0;

  out.true_coincidences_hz = pair_rate * eta_signal * eta_idler * joint * acceptance *
                             out.live_time_signal * out.live_time_idler;
  out.accidental_coincidences_hz = accidental_rate(out.singles_signal_hz, out.singles_idler_hz,
                                                   scenario.coincidence_window_ns);
  out.total_coincidences_hz = out.true_coincidences_hz + out.accidental_coincidences_hz;
  return out;
}

} // namespace plink::model
