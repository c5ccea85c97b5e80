#include "plink/analysis/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "plink/model/optics.hpp"
#include "plink/simkit/rng.hpp"
#include "plink/simkit/simulate.hpp"
#include "plink/tsproc/coincidence.hpp"

namespace plink::analysis {

namespace {

struct IdlerBasis {
  const char* label;
  double polarizer_deg;
};

constexpr IdlerBasis kIdlerBases[4] = {{"H", 0.0}, {"V", 90.0}, {"D", 45.0}, {"A", 135.0}};

bool same_but_pump(const model::LinkScenario& a, const model::LinkScenario& b) {
  auto normalized = b;
  normalized.source.pump_power_mw = a.source.pump_power_mw;
  return normalized == a;
}

} // namespace

std::vector<double> ScanSettings::default_hwp_angles() {
  std::vector<double> angles;
  angles.reserve(16);
  for (int i = 0; i < 16; ++i) angles.push_back(11.25 * i);
  return angles;
}

ScanMeasurement run_visibility_scan(const model::LinkScenario& scenario,
                                    const ScanSettings& settings) {
  scenario.validate();
  if (settings.duration_s <= 0.0) throw std::invalid_argument("scan duration must be > 0");
  const std::vector<double> angles =
      settings.hwp_angles_deg.empty() ? ScanSettings::default_hwp_angles()
                                      : settings.hwp_angles_deg;
  if (angles.size() < 6)
    throw std::invalid_argument("scan needs at least 6 half-wave plate angles");

  const double window_ns = scenario.coincidence_window_ns;
  const std::size_t settings_count = 4 * angles.size();
  const double per_setting_s = settings.duration_s / static_cast<double>(settings_count);

  ScanMeasurement out;
  out.duration_per_setting_s = per_setting_s;

  // Recover the stream delay once per scan from a dedicated slice at the
  // first analyzer setting. When the slice carries no usable correlation
  // (dark-only streams at zero pump, starved statistics) fall back to the
  // group delay of the configured fiber.
  {
    auto cal = scenario;
    cal.analyzer = model::AnalyzerSetting{0.0, kIdlerBases[0].polarizer_deg};
    const double cal_duration = std::min(1.0, settings.duration_s);
    const auto streams = simkit::simulate_link(
        cal, cal_duration, simkit::derive_seed(settings.seed, 0xca1, 0));
    const auto scan = tsproc::find_offset(streams.idler, streams.signal,
                                          settings.offset_search_span_s,
                                          settings.offset_coarse_bin_ns);
    if (scan.found) {
      out.offset_ps = scan.offset_ps;
    } else {
      out.offset_ps = static_cast<TimePs>(
          std::llround(model::propagation_delay_us(scenario.fiber) * kPsPerUs));
    }
    out.offset_significance = scan.significance;
  }

  double displaced_count_sum = 0.0;
  double displaced_duration_sum = 0.0;

  for (std::size_t basis_index = 0; basis_index < 4; ++basis_index) {
    const auto& basis = kIdlerBases[basis_index];
    BasisScan bscan;
    bscan.basis = basis.label;
    bscan.idler_angle_deg = basis.polarizer_deg;
    bscan.hwp_angles_deg = angles;
    bscan.rates_hz.reserve(angles.size());
    bscan.counts.reserve(angles.size());

    for (std::size_t k = 0; k < angles.size(); ++k) {
      auto setting = scenario;
      setting.analyzer =
          model::AnalyzerSetting{2.0 * angles[k], basis.polarizer_deg}; // polarizer = 2 * HWP
      const auto seed =
          simkit::derive_seed(settings.seed, basis_index + 1, k + 1);
      const auto streams = simkit::simulate_link(setting, per_setting_s, seed);
      const auto cc =
          tsproc::find_coincidences(streams.idler, streams.signal, window_ns, out.offset_ps);
      bscan.counts.push_back(cc.count);
      bscan.rates_hz.push_back(static_cast<double>(cc.count) / per_setting_s);

      double displaced =
          tsproc::displaced_window_rate(streams.idler, streams.signal, window_ns, out.offset_ps,
                                        settings.displacement_ns);
      if (settings.average_displacement_sides)
        displaced = 0.5 * (displaced + tsproc::displaced_window_rate(
                                           streams.idler, streams.signal, window_ns,
                                           out.offset_ps, -settings.displacement_ns));
      // pool across every setting; the singles rates do not depend on the
      // analyzer angles, so the accidental floor is shared
      displaced_count_sum += displaced * per_setting_s;
      displaced_duration_sum += per_setting_s;
    }
    out.bases.push_back(std::move(bscan));
  }

  out.accidental_hz = displaced_count_sum / displaced_duration_sum;

  double pair_rate_sum = 0.0;
  for (auto& bscan : out.bases) {
    std::vector<double> sigmas;
    sigmas.reserve(bscan.counts.size());
    for (auto c : bscan.counts)
      sigmas.push_back(std::sqrt(std::max<double>(static_cast<double>(c), 1.0)) /
                       out.duration_per_setting_s);

    const auto raw = fit_sinusoid(bscan.hwp_angles_deg, bscan.rates_hz, sigmas);

    VisibilityResult& r = bscan.result;
    r.basis = bscan.basis;
    r.amplitude_hz = raw.offset;
    r.phase_deg = raw.phase_deg;
    r.v_raw = raw.visibility;
    r.c_max_hz = raw.offset * (1.0 + raw.visibility);
    r.c_min_hz = raw.offset * (1.0 - raw.visibility);
    r.accidental_hz = out.accidental_hz;
    r.residual_rms = raw.residual_rms;
    try {
      const auto corrected =
          background_correct(bscan.hwp_angles_deg, bscan.rates_hz, out.accidental_hz, sigmas);
      r.v_corr = corrected.fit.visibility;
      r.clamped = corrected.clamped;
    } catch (const std::invalid_argument&) {
      // accidental floor at or above the fringe maximum: nothing left after
      // correction (dark-only rows); report zero with the clamp flag set
      r.v_corr = 0.0;
      r.clamped = true;
    }
    pair_rate_sum += r.c_max_hz + r.c_min_hz; // = 2 A
  }

  out.pair_rate_hz = pair_rate_sum / 4.0;
  out.v_hv_raw = 0.5 * (out.bases[0].result.v_raw + out.bases[1].result.v_raw);
  out.v_da_raw = 0.5 * (out.bases[2].result.v_raw + out.bases[3].result.v_raw);
  out.v_avg_raw = 0.5 * (out.v_hv_raw + out.v_da_raw);
  const double v_hv_corr = 0.5 * (out.bases[0].result.v_corr + out.bases[1].result.v_corr);
  const double v_da_corr = 0.5 * (out.bases[2].result.v_corr + out.bases[3].result.v_corr);
  out.v_avg_corr = 0.5 * (v_hv_corr + v_da_corr);
  return out;
}

SweepResult power_sweep(const std::vector<model::LinkScenario>& scenarios,
                        const ScanSettings& settings, double error_correction_efficiency,
                        double sifting_factor) {
  if (scenarios.empty()) throw std::invalid_argument("power sweep needs at least one scenario");
  for (const auto& s : scenarios)
    if (!same_but_pump(scenarios.front(), s))
      throw std::invalid_argument("sweep scenarios must differ only in pump power");

  SweepResult out;
  out.rows.reserve(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    ScanSettings row_settings = settings;
    row_settings.seed = simkit::derive_seed(settings.seed, 0x50e9, i);
    const auto measurement = run_visibility_scan(scenarios[i], row_settings);
    const auto key = bbm92_key_rate(measurement.pair_rate_hz, measurement.v_avg_raw,
                                    error_correction_efficiency, sifting_factor);

    SweepRow row;
    row.pump_mw = scenarios[i].source.pump_power_mw;
    row.pair_rate_hz = measurement.pair_rate_hz;
    row.accidental_hz = measurement.accidental_hz;
    row.v_hv_raw = measurement.v_hv_raw;
    row.v_da_raw = measurement.v_da_raw;
    row.v_avg_raw = measurement.v_avg_raw;
    row.v_avg_corr = measurement.v_avg_corr;
    row.qber = key.qber;
    row.key_rate_hz = key.key_rate_hz;
    out.rows.push_back(row);
    out.measurements.push_back(measurement);
    out.key_rates.push_back(key);
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "pump_mW,C,C_acc,V_hv_raw,V_da_raw,V_avg_raw,V_avg_corr,QBER,key_rate\n";
  os.precision(10);
  for (const auto& r : result.rows) {
    os << r.pump_mw << ',' << r.pair_rate_hz << ',' << r.accidental_hz << ',' << r.v_hv_raw
       << ',' << r.v_da_raw << ',' << r.v_avg_raw << ',' << r.v_avg_corr << ',' << r.qber << ','
       << r.key_rate_hz << "\n";
  }
  return os.str();
}

} // namespace plink::analysis
