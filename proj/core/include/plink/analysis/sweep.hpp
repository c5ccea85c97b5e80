#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "plink/analysis/keyrate.hpp"
#include "plink/analysis/visibility.hpp"
#include "plink/model/params.hpp"
#include "plink/units.hpp"

namespace plink::analysis {

// Controls for the simulated polarization-correlation scan. The idler
// analyzer steps through H, V, D, A while the signal half-wave plate scans;
// duration_s is the total virtual time, split evenly across all settings.
struct ScanSettings {
  std::vector<double> hwp_angles_deg; // default: 16 steps of 11.25 deg
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  double displacement_ns = 7.0;
  bool average_displacement_sides = false;
  double offset_search_span_s = 1e-3;
  double offset_coarse_bin_ns = 1000.0;

  static std::vector<double> default_hwp_angles();
};

struct BasisScan {
  std::string basis;
  double idler_angle_deg = 0.0;
  std::vector<double> hwp_angles_deg;
  std::vector<double> rates_hz;
  std::vector<std::uint64_t> counts;
  VisibilityResult result;
};

struct ScanMeasurement {
  std::vector<BasisScan> bases;
  TimePs offset_ps = 0;           // recovered stream delay
  double offset_significance = 0.0;
  double duration_per_setting_s = 0.0;
  double pair_rate_hz = 0.0;      // C_max + C_min averaged over bases
  double accidental_hz = 0.0;     // pooled displaced-window estimate
  double v_hv_raw = 0.0;
  double v_da_raw = 0.0;
  double v_avg_raw = 0.0;
  double v_avg_corr = 0.0;
};

// Runs the full measurement chain on simulated streams: per-setting link
// simulation, delay recovery, coincidence counting, displaced-window
// accidental estimate, sinusoid fits and background correction.
ScanMeasurement run_visibility_scan(const model::LinkScenario& scenario,
                                    const ScanSettings& settings);

struct SweepRow {
  double pump_mw = 0.0;
  double pair_rate_hz = 0.0;
  double accidental_hz = 0.0;
  double v_hv_raw = 0.0;
  double v_da_raw = 0.0;
  double v_avg_raw = 0.0;
  double v_avg_corr = 0.0;
  double qber = 0.0;
  double key_rate_hz = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<ScanMeasurement> measurements;
  std::vector<KeyRateEstimate> key_rates;
};

// One scan per scenario; scenarios must differ only in pump power. Per-row
// seeds derive from (settings.seed, row index).
SweepResult power_sweep(const std::vector<model::LinkScenario>& scenarios,
                        const ScanSettings& settings,
                        double error_correction_efficiency = 1.1,
                        double sifting_factor = 1.0);

// CSV with one row per pump power:
// pump_mW,C,C_acc,V_hv_raw,V_da_raw,V_avg_raw,V_avg_corr,QBER,key_rate
std::string sweep_csv(const SweepResult& result);

} // namespace plink::analysis
