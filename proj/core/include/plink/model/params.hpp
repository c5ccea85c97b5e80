#pragma once
#include <optional>

namespace plink::model {

// Pair source parameters. Wavelengths in nm, times in ps, temperatures in
// degrees Celsius. Brightness is the pair production rate per mW of pump.
struct SourceParams {
  double brightness_pairs_per_s_per_mw = 1.0e6;
  double pump_power_mw = 1.0;
  double intrinsic_visibility_hv = 1.0;
  double intrinsic_visibility_da = 1.0;
  double signal_center_wavelength_nm = 1310.12;
  double signal_bandwidth_fwhm_nm = 0.7;
  double idler_center_wavelength_nm = 586.0;
  double pair_correlation_fwhm_ps = 4.0;
  double wavelength_temperature_slope_nm_per_k = 0.8;
  double reference_temperature_c = 33.4;
  double reference_wavelength_nm = 1310.12;

  void validate() const;
  bool operator==(const SourceParams&) const = default;
};

// Standard single-mode fiber channel. The dispersion coefficient follows the
// usual G.652 four-term parameterization D(lambda) = S0/4 * (lambda - lambda0^4/lambda^3).
struct FiberParams {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.34;
  double group_index = 1.4677;
  double zero_dispersion_wavelength_nm = 1313.0;
  double dispersion_slope_ps_per_nm2_km = 0.092;
  double extra_loss_db = 0.0;

  void validate() const;
  bool operator==(const FiberParams&) const = default;
};

// Single-photon detector. Dead time is non-paralyzable. max_count_rate_hz is
// informational only and does not enter any computation.
struct DetectorParams {
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;
  double jitter_fwhm_ps = 0.0;
  double dead_time_ns = 0.0;
  double max_count_rate_hz = 0.0;
  double afterpulse_probability = 0.0; // off by default
  double afterpulse_tau_ns = 100.0;

  void validate() const;
  bool operator==(const DetectorParams&) const = default;

  // Typical parameter sets for the two detector families used on this link.
  static DetectorParams silicon_apd();
  static DetectorParams ingaas_apd();
};

// Polarizer-equivalent projection angles, interpreted modulo 180 degrees.
// Half-wave plate angles must be converted (polarizer = 2 * HWP) before
// they reach this struct.
struct AnalyzerSetting {
  double signal_angle_deg = 0.0;
  double idler_angle_deg = 0.0;

  bool operator==(const AnalyzerSetting&) const = default;
};

// Complete description of one link experiment.
struct LinkScenario {
  SourceParams source;
  FiberParams fiber;
  DetectorParams detector_signal;
  DetectorParams detector_idler;
  double path_efficiency_signal = 1.0;
  double path_efficiency_idler = 1.0;
  std::optional<AnalyzerSetting> analyzer;
  double coincidence_window_ns = 1.25;

  void validate() const;
  bool operator==(const LinkScenario&) const = default;
};

} // namespace plink::model
