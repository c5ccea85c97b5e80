#pragma once
#include <cstdint>

#include "plink/model/params.hpp"
#include "plink/simkit/event_stream.hpp"

namespace plink::simkit {

// Refuse to materialize streams beyond this many events unless the caller
// raises the budget explicitly.
inline constexpr std::uint64_t kDefaultMaxEvents = 250'000'000;

struct SynthesizedPairs {
  EventStream signal; // channel 0
  EventStream idler;  // channel 1
  std::uint64_t generated_pairs = 0;
  // Truth mapping: pair k is signal event k and idler event k; both streams
  // carry pair_ids so the mapping survives re-sorting and later stages.
};

// Survivor counts of pair photons along one arm. Dark and afterpulse events
// are tallied separately so the chain stays monotone non-increasing.
struct ArmReport {
  std::uint64_t after_analyzer = 0;
  std::uint64_t after_path_loss = 0;
  std::uint64_t after_fiber_loss = 0;
  std::uint64_t after_detector_efficiency = 0;
  std::uint64_t after_dead_time = 0;
  std::uint64_t dark_events = 0;
  std::uint64_t final_events = 0;
};

struct SimulationReport {
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  std::uint64_t generated_pairs = 0;
  ArmReport signal;
  ArmReport idler;
};

struct LinkRealization {
  EventStream signal;
  EventStream idler;
  SimulationReport report;
};

struct SimulateOptions {
  bool track_origins = false;
  std::uint64_t max_events = kDefaultMaxEvents;
};

// Homogeneous Poisson pair emission at rate brightness * pump_power; the
// idler timestamp of each pair is offset by a Gaussian of FWHM
// pair_correlation_fwhm. Deterministic in (scenario, duration, seed).
SynthesizedPairs synthesize_pairs(const model::LinkScenario& scenario, double duration_s,
                                  std::uint64_t seed,
                                  std::uint64_t max_events = kDefaultMaxEvents);

// Independent Bernoulli survival per event, order preserved.
EventStream thin(const EventStream& stream, double survival_probability, std::uint64_t seed);

// Efficiency thinning, Gaussian timing jitter, Poisson dark counts over
// [0, duration], optional afterpulses, then the non-paralyzable dead-time
// filter.
EventStream apply_detector(const EventStream& stream, const model::DetectorParams& detector,
                           double duration_s, std::uint64_t seed);

// Shift every timestamp; duration extends accordingly. Throws on overflow.
EventStream delay_stream(const EventStream& stream, TimePs delay_ps);

// Full chain: pair emission -> joint analyzer sampling -> path loss ->
// fiber loss/delay/chromatic jitter (signal arm) -> detector per arm.
// Stage survival is applied per pair during generation so only surviving
// events are materialized; statistics are identical to running the stages
// one by one.
LinkRealization simulate_link(const model::LinkScenario& scenario, double duration_s,
                              std::uint64_t seed, const SimulateOptions& options = {});

} // namespace plink::simkit
