#include "plink/model/params.hpp"

#include <stdexcept>
#include <string>

namespace plink::model {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_unit_interval(double v, const char* name) {
  require(v >= 0.0 && v <= 1.0, std::string(name) + " must be within [0, 1]");
}

} // namespace

void SourceParams::validate() const {
  require(brightness_pairs_per_s_per_mw > 0.0, "source.brightness must be > 0");
  require(pump_power_mw >= 0.0, "source.pump_power must be >= 0");
  require_unit_interval(intrinsic_visibility_hv, "source.intrinsic_visibility_hv");
  require_unit_interval(intrinsic_visibility_da, "source.intrinsic_visibility_da");
  require(signal_bandwidth_fwhm_nm > 0.0, "source.signal_bandwidth_fwhm must be > 0");
  require(pair_correlation_fwhm_ps >= 0.0, "source.pair_correlation_fwhm must be >= 0");
  require(signal_center_wavelength_nm > 0.0, "source.signal_center_wavelength must be > 0");
  require(idler_center_wavelength_nm > 0.0, "source.idler_center_wavelength must be > 0");
}

void FiberParams::validate() const {
  require(length_km >= 0.0, "fiber.length must be >= 0");
  require(attenuation_db_per_km >= 0.0, "fiber.attenuation must be >= 0");
  require(group_index > 0.0, "fiber.group_index must be > 0");
  require(zero_dispersion_wavelength_nm >= 1200.0 && zero_dispersion_wavelength_nm <= 1400.0,
          "fiber.zero_dispersion_wavelength must lie within 1200-1400 nm");
  require(dispersion_slope_ps_per_nm2_km >= 0.0, "fiber.dispersion_slope must be >= 0");
  require(extra_loss_db >= 0.0, "fiber.extra_loss must be >= 0");
}

void DetectorParams::validate() const {
  require_unit_interval(efficiency, "detector.efficiency");
  require(dark_rate_hz >= 0.0, "detector.dark_rate must be >= 0");
  require(jitter_fwhm_ps >= 0.0, "detector.jitter_fwhm must be >= 0");
  require(dead_time_ns >= 0.0, "detector.dead_time must be >= 0");
  require_unit_interval(afterpulse_probability, "detector.afterpulse_probability");
  require(afterpulse_tau_ns > 0.0, "detector.afterpulse_tau must be > 0");
}

DetectorParams DetectorParams::silicon_apd() {
  DetectorParams d;
  d.efficiency = 0.60;
  d.dark_rate_hz = 300.0;
  d.jitter_fwhm_ps = 500.0;
  d.dead_time_ns = 22.0;
  d.max_count_rate_hz = 3.0e7;
  return d;
}

DetectorParams DetectorParams::ingaas_apd() {
  DetectorParams d;
  d.efficiency = 0.15;
  d.dark_rate_hz = 2000.0;
  d.jitter_fwhm_ps = 250.0;
  d.dead_time_ns = 1000.0;
  d.max_count_rate_hz = 1.0e6;
  return d;
}

void LinkScenario::validate() const {
  source.validate();
  fiber.validate();
  detector_signal.validate();
  detector_idler.validate();
  require_unit_interval(path_efficiency_signal, "path_efficiency_signal");
  require_unit_interval(path_efficiency_idler, "path_efficiency_idler");
  require(coincidence_window_ns > 0.0, "coincidence_window must be > 0");
}

} // namespace plink::model
