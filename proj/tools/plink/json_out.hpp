#pragma once
// Stable JSON renderings of every result type the CLI emits. All objects use
// ordered keys so reruns are byte-identical.
#include <string>

#include "json.hpp"
#include "plink/analysis/keyrate.hpp"
#include "plink/analysis/sweep.hpp"
#include "plink/model/optics.hpp"
#include "plink/simkit/simulate.hpp"
#include "plink/tsproc/coincidence.hpp"

namespace plink::cli {

using ojson = nlohmann::ordered_json;

ojson to_json(const model::RatePrediction& p);
ojson to_json(const simkit::SimulationReport& r);
ojson to_json(const tsproc::CoincidenceResult& c, double duration_s);
ojson to_json(const tsproc::OffsetScan& s);
ojson to_json(const analysis::VisibilityResult& v, double idler_angle_deg);
ojson to_json(const analysis::ScanMeasurement& m);
ojson to_json(const analysis::KeyRateEstimate& k);
ojson to_json(const analysis::SweepResult& s);

std::string dump_pretty(const ojson& j);

} // namespace plink::cli
