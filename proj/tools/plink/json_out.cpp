#include "json_out.hpp"

namespace plink::cli {

namespace {

ojson arm_json(const simkit::ArmReport& a) {
  ojson j;
  j["after_analyzer"] = a.after_analyzer;
  j["after_path_loss"] = a.after_path_loss;
  j["after_fiber_loss"] = a.after_fiber_loss;
  j["after_detector_efficiency"] = a.after_detector_efficiency;
  j["after_dead_time"] = a.after_dead_time;
  j["dark_events"] = a.dark_events;
  j["final_events"] = a.final_events;
  return j;
}

} // namespace

ojson to_json(const model::RatePrediction& p) {
  ojson j;
  j["singles_signal_hz"] = p.singles_signal_hz;
  j["singles_idler_hz"] = p.singles_idler_hz;
  j["true_coincidences_hz"] = p.true_coincidences_hz;
  j["accidental_coincidences_hz"] = p.accidental_coincidences_hz;
  j["total_coincidences_hz"] = p.total_coincidences_hz;
  j["window_acceptance"] = p.window_acceptance;
  j["live_time_signal"] = p.live_time_signal;
  j["live_time_idler"] = p.live_time_idler;
  return j;
}

ojson to_json(const simkit::SimulationReport& r) {
  ojson j;
  j["seed"] = r.seed;
  j["duration_s"] = r.duration_s;
  j["generated_pairs"] = r.generated_pairs;
  j["signal"] = arm_json(r.signal);
  j["idler"] = arm_json(r.idler);
  return j;
}

ojson to_json(const tsproc::CoincidenceResult& c, double duration_s) {
  ojson j;
  j["count"] = c.count;
  j["rate_hz"] = c.rate_hz;
  j["window_ns"] = c.window_ns;
  j["offset_ps"] = c.applied_offset_ps;
  j["duration_s"] = duration_s;
  return j;
}

ojson to_json(const tsproc::OffsetScan& s) {
  ojson j;
  j["found"] = s.found;
  j["offset_ps"] = s.offset_ps;
  j["significance"] = s.significance;
  j["final_bin_ps"] = s.final_bin_ps;
  return j;
}

ojson to_json(const analysis::VisibilityResult& v, double idler_angle_deg) {
  ojson j;
  j["basis"] = v.basis;
  j["idler_angle_deg"] = idler_angle_deg;
  j["amplitude_hz"] = v.amplitude_hz;
  j["phase_deg"] = v.phase_deg;
  j["v_raw"] = v.v_raw;
  j["v_corr"] = v.v_corr;
  j["c_max_hz"] = v.c_max_hz;
  j["c_min_hz"] = v.c_min_hz;
  j["accidental_hz"] = v.accidental_hz;
  j["residual_rms"] = v.residual_rms;
  j["clamped"] = v.clamped;
  return j;
}

ojson to_json(const analysis::ScanMeasurement& m) {
  ojson j;
  j["pair_rate_hz"] = m.pair_rate_hz;
  j["accidental_hz"] = m.accidental_hz;
  j["offset_ps"] = m.offset_ps;
  j["offset_significance"] = m.offset_significance;
  j["duration_per_setting_s"] = m.duration_per_setting_s;
  j["v_hv_raw"] = m.v_hv_raw;
  j["v_da_raw"] = m.v_da_raw;
  j["v_avg_raw"] = m.v_avg_raw;
  j["v_avg_corr"] = m.v_avg_corr;
  ojson bases = ojson::array();
  for (const auto& b : m.bases) bases.push_back(to_json(b.result, b.idler_angle_deg));
  j["bases"] = bases;
  return j;
}

ojson to_json(const analysis::KeyRateEstimate& k) {
  ojson j;
  j["coincidence_rate_hz"] = k.coincidence_rate_hz;
  j["visibility"] = k.visibility;
  j["qber"] = k.qber;
  j["error_correction_efficiency"] = k.error_correction_efficiency;
  j["sifting_factor"] = k.sifting_factor;
  j["secret_fraction"] = k.secret_fraction;
  j["key_rate_hz"] = k.key_rate_hz;
  j["below_threshold"] = k.below_threshold;
  return j;
}

ojson to_json(const analysis::SweepResult& s) {
  ojson j;
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    ojson row;
    row["pump_mw"] = r.pump_mw;
    row["pair_rate_hz"] = r.pair_rate_hz;
    row["accidental_hz"] = r.accidental_hz;
    row["v_hv_raw"] = r.v_hv_raw;
    row["v_da_raw"] = r.v_da_raw;
    row["v_avg_raw"] = r.v_avg_raw;
    row["v_avg_corr"] = r.v_avg_corr;
    row["qber"] = r.qber;
    row["key_rate_hz"] = r.key_rate_hz;
    row["measurement"] = to_json(s.measurements[i]);
    row["key_rate"] = to_json(s.key_rates[i]);
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

std::string dump_pretty(const ojson& j) { return j.dump(2) + "\n"; }

} // namespace plink::cli
