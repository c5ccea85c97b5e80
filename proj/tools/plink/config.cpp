#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>

namespace plink::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!ok.count(key))
      throw ConfigError("unknown key: " + (path.empty() ? key : path + "." + key));
  }
}

std::string join_path(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError("missing key: " + join_path(path, key));
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("expected a number at " + join_path(path, key));
  return v.get<double>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError("expected a boolean at " + path + "." + key);
  return v.get<bool>();
}

model::SourceParams parse_source(const json& obj) {
  reject_unknown_keys(obj, "source",
                      {"brightness_pairs_per_s_per_mw", "pump_power_mw",
                       "intrinsic_visibility_hv", "intrinsic_visibility_da",
                       "signal_center_wavelength_nm", "signal_bandwidth_fwhm_nm",
                       "idler_center_wavelength_nm", "pair_correlation_fwhm_ps",
                       "wavelength_temperature_slope_nm_per_k", "reference_temperature_c",
                       "reference_wavelength_nm"});
  model::SourceParams s;
  s.brightness_pairs_per_s_per_mw =
      get_number(obj, "source", "brightness_pairs_per_s_per_mw", s.brightness_pairs_per_s_per_mw,
                 true);
  s.pump_power_mw = get_number(obj, "source", "pump_power_mw", s.pump_power_mw, true);
  s.intrinsic_visibility_hv =
      get_number(obj, "source", "intrinsic_visibility_hv", s.intrinsic_visibility_hv);
  s.intrinsic_visibility_da =
      get_number(obj, "source", "intrinsic_visibility_da", s.intrinsic_visibility_da);
  s.signal_center_wavelength_nm =
      get_number(obj, "source", "signal_center_wavelength_nm", s.signal_center_wavelength_nm);
  s.signal_bandwidth_fwhm_nm =
      get_number(obj, "source", "signal_bandwidth_fwhm_nm", s.signal_bandwidth_fwhm_nm);
  s.idler_center_wavelength_nm =
      get_number(obj, "source", "idler_center_wavelength_nm", s.idler_center_wavelength_nm);
  s.pair_correlation_fwhm_ps =
      get_number(obj, "source", "pair_correlation_fwhm_ps", s.pair_correlation_fwhm_ps);
  s.wavelength_temperature_slope_nm_per_k =
      get_number(obj, "source", "wavelength_temperature_slope_nm_per_k",
                 s.wavelength_temperature_slope_nm_per_k);
  s.reference_temperature_c =
      get_number(obj, "source", "reference_temperature_c", s.reference_temperature_c);
  s.reference_wavelength_nm =
      get_number(obj, "source", "reference_wavelength_nm", s.reference_wavelength_nm);
  return s;
}

model::FiberParams parse_fiber(const json& obj) {
  reject_unknown_keys(obj, "fiber",
                      {"length_km", "attenuation_db_per_km", "group_index",
                       "zero_dispersion_wavelength_nm", "dispersion_slope_ps_per_nm2_km",
                       "extra_loss_db"});
  model::FiberParams f;
  f.length_km = get_number(obj, "fiber", "length_km", f.length_km, true);
  f.attenuation_db_per_km =
      get_number(obj, "fiber", "attenuation_db_per_km", f.attenuation_db_per_km);
  f.group_index = get_number(obj, "fiber", "group_index", f.group_index);
  f.zero_dispersion_wavelength_nm =
      get_number(obj, "fiber", "zero_dispersion_wavelength_nm", f.zero_dispersion_wavelength_nm);
  f.dispersion_slope_ps_per_nm2_km = get_number(obj, "fiber", "dispersion_slope_ps_per_nm2_km",
                                                f.dispersion_slope_ps_per_nm2_km);
  f.extra_loss_db = get_number(obj, "fiber", "extra_loss_db", f.extra_loss_db);
  return f;
}

model::DetectorParams parse_detector(const json& obj, const std::string& path) {
  reject_unknown_keys(obj, path,
                      {"efficiency", "dark_rate_hz", "jitter_fwhm_ps", "dead_time_ns",
                       "max_count_rate_hz", "afterpulse_probability", "afterpulse_tau_ns"});
  model::DetectorParams d;
  d.efficiency = get_number(obj, path, "efficiency", d.efficiency, true);
  d.dark_rate_hz = get_number(obj, path, "dark_rate_hz", d.dark_rate_hz);
  d.jitter_fwhm_ps = get_number(obj, path, "jitter_fwhm_ps", d.jitter_fwhm_ps);
  d.dead_time_ns = get_number(obj, path, "dead_time_ns", d.dead_time_ns);
  d.max_count_rate_hz = get_number(obj, path, "max_count_rate_hz", d.max_count_rate_hz);
  d.afterpulse_probability =
      get_number(obj, path, "afterpulse_probability", d.afterpulse_probability);
  d.afterpulse_tau_ns = get_number(obj, path, "afterpulse_tau_ns", d.afterpulse_tau_ns);
  return d;
}

RunControls parse_run(const json& obj) {
  reject_unknown_keys(obj, "run",
                      {"duration_s", "seed", "output_dir", "sweep_pump_mw", "hwp_scan_step_deg",
                       "displacement_ns", "average_displacement_sides", "offset_search_span_s",
                       "offset_coarse_bin_ns", "track_origins"});
  RunControls r;
  r.duration_s = get_number(obj, "run", "duration_s", r.duration_s);
  if (r.duration_s <= 0.0) throw ConfigError("run.duration_s must be > 0");
  if (obj.contains("seed")) {
    const auto& v = obj.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer())
      throw ConfigError("expected an integer at run.seed");
    r.seed = v.get<std::uint64_t>();
  }
  if (obj.contains("output_dir")) {
    const auto& v = obj.at("output_dir");
    if (!v.is_string()) throw ConfigError("expected a string at run.output_dir");
    r.output_dir = v.get<std::string>();
  }
  if (obj.contains("sweep_pump_mw")) {
    const auto& v = obj.at("sweep_pump_mw");
    if (!v.is_array()) throw ConfigError("expected an array at run.sweep_pump_mw");
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("expected numbers in run.sweep_pump_mw");
      r.sweep_pump_mw.push_back(e.get<double>());
    }
  }
  r.hwp_scan_step_deg = get_number(obj, "run", "hwp_scan_step_deg", r.hwp_scan_step_deg);
  if (r.hwp_scan_step_deg <= 0.0 || r.hwp_scan_step_deg > 30.0)
    throw ConfigError("run.hwp_scan_step_deg must lie in (0, 30]");
  r.displacement_ns = get_number(obj, "run", "displacement_ns", r.displacement_ns);
  r.average_displacement_sides =
      get_bool(obj, "run", "average_displacement_sides", r.average_displacement_sides);
  r.offset_search_span_s =
      get_number(obj, "run", "offset_search_span_s", r.offset_search_span_s);
  r.offset_coarse_bin_ns =
      get_number(obj, "run", "offset_coarse_bin_ns", r.offset_coarse_bin_ns);
  r.track_origins = get_bool(obj, "run", "track_origins", r.track_origins);
  return r;
}

} // namespace

std::vector<double> ScenarioConfig::scan_hwp_angles() const {
  std::vector<double> angles;
  for (double a = 0.0; a < 180.0 - 1e-9; a += run.hwp_scan_step_deg) angles.push_back(a);
  return angles;
}

std::filesystem::path ScenarioConfig::resolved_output_dir() const {
  if (!run.output_dir.empty()) return run.output_dir;
  if (const char* env = std::getenv("PLINK_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

ScenarioConfig parse_scenario_config(const nlohmann::json& root) {
  if (!root.is_object()) throw ConfigError("top-level config must be an object");
  reject_unknown_keys(root, "",
                      {"source", "fiber", "detector_signal", "detector_idler",
                       "path_efficiency_signal", "path_efficiency_idler", "analyzer",
                       "coincidence_window_ns", "run"});

  ScenarioConfig cfg;
  if (!root.contains("source")) throw ConfigError("missing key: source");
  cfg.scenario.source = parse_source(root.at("source"));
  if (root.contains("fiber")) cfg.scenario.fiber = parse_fiber(root.at("fiber"));
  else cfg.scenario.fiber.length_km = 0.0;
  if (!root.contains("detector_signal")) throw ConfigError("missing key: detector_signal");
  cfg.scenario.detector_signal = parse_detector(root.at("detector_signal"), "detector_signal");
  if (!root.contains("detector_idler")) throw ConfigError("missing key: detector_idler");
  cfg.scenario.detector_idler = parse_detector(root.at("detector_idler"), "detector_idler");
  cfg.scenario.path_efficiency_signal =
      get_number(root, "", "path_efficiency_signal", cfg.scenario.path_efficiency_signal);
  cfg.scenario.path_efficiency_idler =
      get_number(root, "", "path_efficiency_idler", cfg.scenario.path_efficiency_idler);
  if (root.contains("analyzer")) {
    const auto& a = root.at("analyzer");
    reject_unknown_keys(a, "analyzer", {"signal_angle_deg", "idler_angle_deg"});
    model::AnalyzerSetting setting;
    setting.signal_angle_deg = get_number(a, "analyzer", "signal_angle_deg", 0.0, true);
    setting.idler_angle_deg = get_number(a, "analyzer", "idler_angle_deg", 0.0, true);
    cfg.scenario.analyzer = setting;
  }
  cfg.scenario.coincidence_window_ns =
      get_number(root, "", "coincidence_window_ns", cfg.scenario.coincidence_window_ns);
  if (root.contains("run")) cfg.run = parse_run(root.at("run"));

  try {
    cfg.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return parse_scenario_config(root);
}

} // namespace plink::cli
