#pragma once
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "plink/model/params.hpp"

namespace plink::cli {

// Configuration problems carry the offending key path in the message and map
// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunControls {
  double duration_s = 1.0;
  std::uint64_t seed = 1;
  std::string output_dir; // empty: PLINK_OUTPUT_DIR env var, else "."
  std::vector<double> sweep_pump_mw;
  double hwp_scan_step_deg = 11.25;
  double displacement_ns = 7.0;
  bool average_displacement_sides = false;
  double offset_search_span_s = 1e-3;
  double offset_coarse_bin_ns = 1000.0;
  bool track_origins = false;
};

struct ScenarioConfig {
  model::LinkScenario scenario;
  RunControls run;

  std::vector<double> scan_hwp_angles() const;
  std::filesystem::path resolved_output_dir() const;
};

// Strict parser: unknown keys are rejected with their full path, physical
// fields are validated through the model invariants.
ScenarioConfig parse_scenario_config(const nlohmann::json& root);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

} // namespace plink::cli
