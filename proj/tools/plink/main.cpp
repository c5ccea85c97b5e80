// plink: entangled-pair link simulator and timestamp analysis toolbox.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error,
// 4 no correlation found (scan-delay).
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "json_out.hpp"
#include "plink/analysis/keyrate.hpp"
#include "plink/analysis/sweep.hpp"
#include "plink/model/optics.hpp"
#include "plink/simkit/simulate.hpp"
#include "plink/tsproc/coincidence.hpp"
#include "plink/tsproc/stream_io.hpp"

namespace fs = std::filesystem;
using namespace plink;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitNoCorrelation = 4;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
}

analysis::ScanSettings scan_settings_from(const cli::ScenarioConfig& cfg) {
  analysis::ScanSettings s;
  s.hwp_angles_deg = cfg.scan_hwp_angles();
  s.duration_s = cfg.run.duration_s;
  s.seed = cfg.run.seed;
  s.displacement_ns = cfg.run.displacement_ns;
  s.average_displacement_sides = cfg.run.average_displacement_sides;
  s.offset_search_span_s = cfg.run.offset_search_span_s;
  s.offset_coarse_bin_ns = cfg.run.offset_coarse_bin_ns;
  return s;
}

int cmd_simulate(const std::string& config_path, const std::string& output_override) {
  auto cfg = cli::load_scenario_config(config_path);
  if (!output_override.empty()) cfg.run.output_dir = output_override;
  const fs::path out_dir = cfg.resolved_output_dir();
  fs::create_directories(out_dir);

  simkit::SimulateOptions options;
  options.track_origins = cfg.run.track_origins;
  const auto real =
      simkit::simulate_link(cfg.scenario, cfg.run.duration_s, cfg.run.seed, options);

  tsproc::write_stream(real.signal, out_dir / "signal.plnk");
  tsproc::write_stream(real.idler, out_dir / "idler.plnk");

  auto j = cli::to_json(real.report);
  j["files"] = {{"signal", "signal.plnk"}, {"idler", "idler.plnk"}};
  write_text(out_dir / "report.json", cli::dump_pretty(j));
  std::cout << cli::dump_pretty(j);
  return kExitOk;
}

int cmd_coincide(const std::string& file_a, const std::string& file_b, double window_ns,
                 std::int64_t offset_ps, bool with_displacement, double displacement_ns,
                 const std::string& json_path) {
  const auto a = tsproc::read_stream(file_a);
  const auto b = tsproc::read_stream(file_b);
  const auto result = tsproc::find_coincidences(a, b, window_ns, offset_ps);
  const double duration = std::max(a.duration_s(), b.duration_s());
  auto j = cli::to_json(result, duration);
  if (with_displacement) {
    j["displacement_ns"] = displacement_ns;
    j["accidental_rate_hz"] =
        tsproc::displaced_window_rate(a, b, window_ns, offset_ps, displacement_ns);
  }
  if (!json_path.empty()) write_text(json_path, cli::dump_pretty(j));
  std::cout << cli::dump_pretty(j);
  return kExitOk;
}

int cmd_scan_delay(const std::string& file_a, const std::string& file_b, double span_s,
                   double coarse_bin_ns, const std::string& output_dir) {
  const auto a = tsproc::read_stream(file_a);
  const auto b = tsproc::read_stream(file_b);
  const auto scan = tsproc::find_offset(a, b, span_s, coarse_bin_ns);

  auto j = cli::to_json(scan);
  if (scan.found) {
    const fs::path out_dir = output_dir.empty() ? fs::path(".") : fs::path(output_dir);
    fs::create_directories(out_dir);
    const auto hist = tsproc::correlation_histogram(
        a, b, 10, -5000, 5000, scan.offset_ps);
    tsproc::write_histogram_csv(hist, out_dir / "delay_histogram.csv");
    j["histogram_csv"] = "delay_histogram.csv";
  }
  std::cout << cli::dump_pretty(j);
  if (!scan.found) {
    std::cerr << "no correlation found\n";
    return kExitNoCorrelation;
  }
  return kExitOk;
}

int cmd_visibility(const std::string& config_path, const std::string& output_override) {
  auto cfg = cli::load_scenario_config(config_path);
  if (!output_override.empty()) cfg.run.output_dir = output_override;
  const fs::path out_dir = cfg.resolved_output_dir();
  fs::create_directories(out_dir);

  const auto scan = analysis::run_visibility_scan(cfg.scenario, scan_settings_from(cfg));

  // correlation-fringe table: one row per HWP angle, one column per basis
  std::string csv = "hwp_angle_deg";
  for (const auto& b : scan.bases) csv += ",rate_" + b.basis + "_hz";
  csv += "\n";
  for (std::size_t k = 0; k < scan.bases.front().hwp_angles_deg.size(); ++k) {
    csv += std::to_string(scan.bases.front().hwp_angles_deg[k]);
    for (const auto& b : scan.bases) csv += "," + std::to_string(b.rates_hz[k]);
    csv += "\n";
  }
  write_text(out_dir / "visibility_scan.csv", csv);
  write_text(out_dir / "visibility.json", cli::dump_pretty(cli::to_json(scan)));
  std::cout << cli::dump_pretty(cli::to_json(scan));
  return kExitOk;
}

int cmd_keyrate(double pairs_hz, double visibility, double f, double sifting) {
  const auto estimate = analysis::bbm92_key_rate(pairs_hz, visibility, f, sifting);
  auto j = cli::to_json(estimate);
  std::cout << cli::dump_pretty(j);
  if (estimate.below_threshold) std::cerr << "below threshold: no secure key\n";
  return kExitOk;
}

int cmd_predict(const std::string& config_path) {
  const auto cfg = cli::load_scenario_config(config_path);
  const auto prediction = model::expected_rates(cfg.scenario);
  auto j = cli::to_json(prediction);
  if (prediction.singles_signal_hz > 0.0 && prediction.singles_idler_hz > 0.0)
    j["heralding_efficiency"] = analysis::heralding_efficiency(
        prediction.true_coincidences_hz, prediction.singles_signal_hz,
        prediction.singles_idler_hz);
  std::cout << cli::dump_pretty(j);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, double f, double sifting,
              const std::string& output_override) {
  auto cfg = cli::load_scenario_config(config_path);
  if (!output_override.empty()) cfg.run.output_dir = output_override;
  if (cfg.run.sweep_pump_mw.empty())
    throw cli::ConfigError("missing key: run.sweep_pump_mw (required by the sweep command)");
  const fs::path out_dir = cfg.resolved_output_dir();
  fs::create_directories(out_dir);

  std::vector<model::LinkScenario> scenarios;
  for (double pump : cfg.run.sweep_pump_mw) {
    auto s = cfg.scenario;
    s.source.pump_power_mw = pump;
    scenarios.push_back(s);
  }
  const auto sweep = analysis::power_sweep(scenarios, scan_settings_from(cfg), f, sifting);
  write_text(out_dir / "sweep.csv", analysis::sweep_csv(sweep));
  write_text(out_dir / "sweep.json", cli::dump_pretty(cli::to_json(sweep)));
  std::cout << analysis::sweep_csv(sweep);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangled photon pair link simulator and coincidence toolbox"};
  app.require_subcommand(1);

  std::string config_path, output_dir, file_a, file_b, json_path;
  double window_ns = 1.25;
  std::int64_t offset_ps = 0;
  double span_s = 1e-3, coarse_bin_ns = 1000.0;
  double pairs_hz = 0.0, vis = 0.0, f_ec = 1.1, sifting = 1.0;

  auto* simulate = app.add_subcommand("simulate", "Generate timestamp streams for a scenario");
  simulate->add_option("-c,--config", config_path, "Scenario config (JSON)")->required();
  simulate->add_option("-o,--output", output_dir, "Output directory");

  double displacement_ns = 7.0;
  auto* coincide = app.add_subcommand("coincide", "Count coincidences between two streams");
  coincide->add_option("fileA", file_a)->required();
  coincide->add_option("fileB", file_b)->required();
  coincide->add_option("-w,--window", window_ns, "Coincidence window (ns)");
  coincide->add_option("--offset", offset_ps, "Applied offset (ps)");
  auto* displacement_opt = coincide->add_option(
      "--displacement", displacement_ns,
      "Also estimate the accidental rate in a window displaced by this many ns");
  coincide->add_option("--json", json_path, "Also write the result to this file");

  auto* scan_delay = app.add_subcommand("scan-delay", "Recover the delay between two streams");
  scan_delay->add_option("fileA", file_a)->required();
  scan_delay->add_option("fileB", file_b)->required();
  scan_delay->add_option("--span", span_s, "Search span (s)");
  scan_delay->add_option("--coarse-bin-ns", coarse_bin_ns, "Coarse histogram bin (ns)");
  scan_delay->add_option("-o,--output", output_dir, "Output directory for the histogram CSV");

  auto* visibility = app.add_subcommand("visibility", "Run the polarization-correlation scan");
  visibility->add_option("-c,--config", config_path, "Scenario config (JSON)")->required();
  visibility->add_option("-o,--output", output_dir, "Output directory");

  auto* keyrate = app.add_subcommand("keyrate", "BBM-92 asymptotic key rate");
  keyrate->add_option("--pairs", pairs_hz, "Coincidence rate (1/s)")->required();
  keyrate->add_option("--visibility", vis, "Average fringe visibility")->required();
  keyrate->add_option("--f", f_ec, "Error correction efficiency");
  keyrate->add_option("--sifting", sifting, "Sifting factor (1 or 0.5)");

  auto* predict = app.add_subcommand("predict", "Closed-form rate prediction, no simulation");
  predict->add_option("-c,--config", config_path, "Scenario config (JSON)")->required();

  auto* sweep = app.add_subcommand("sweep", "Pump-power sweep over the scan pipeline");
  sweep->add_option("-c,--config", config_path, "Scenario config (JSON)")->required();
  sweep->add_option("--f", f_ec, "Error correction efficiency");
  sweep->add_option("--sifting", sifting, "Sifting factor");
  sweep->add_option("-o,--output", output_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, output_dir);
    if (coincide->parsed())
      return cmd_coincide(file_a, file_b, window_ns, offset_ps,
                          displacement_opt->count() > 0, displacement_ns, json_path);
    if (scan_delay->parsed())
      return cmd_scan_delay(file_a, file_b, span_s, coarse_bin_ns, output_dir);
    if (visibility->parsed()) return cmd_visibility(config_path, output_dir);
    if (keyrate->parsed()) return cmd_keyrate(pairs_hz, vis, f_ec, sifting);
    if (predict->parsed()) return cmd_predict(config_path);
    if (sweep->parsed()) return cmd_sweep(config_path, f_ec, sifting, output_dir);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
