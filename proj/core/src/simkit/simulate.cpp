#include "plink/simkit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "plink/model/optics.hpp"
#include "plink/simkit/rng.hpp"

namespace plink::simkit {

namespace {

constexpr unsigned kSignalChannel = 0;
constexpr unsigned kIdlerChannel = 1;

TimePs clamp_to(TimePs t, TimePs duration_ps) {
  return std::clamp<TimePs>(t, 0, duration_ps);
}

void check_budget(std::uint64_t n, std::uint64_t max_events) {
  if (n > max_events)
    throw std::length_error("event count " + std::to_string(n) +
                            " exceeds the configured budget of " + std::to_string(max_events));
}

// Sort events by time, dragging pair ids along when present.
void sort_with_ids(EventStream& s) {
  if (std::is_sorted(s.times.begin(), s.times.end())) return;
  if (!s.has_origins()) {
    std::sort(s.times.begin(), s.times.end());
    return;
  }
  std::vector<std::size_t> order(s.times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.times[a] < s.times[b]; });
  std::vector<TimePs> times(s.times.size());
  std::vector<std::int64_t> ids(s.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    times[i] = s.times[order[i]];
    ids[i] = s.pair_ids[order[i]];
  }
  s.times = std::move(times);
  s.pair_ids = std::move(ids);
}

// Poisson event train over [0, duration]; times and ids appended in lockstep.
void append_poisson(std::vector<TimePs>& times, std::vector<std::int64_t>& ids, double rate_hz,
                    TimePs duration_ps, SplitRng& rng) {
  if (rate_hz <= 0.0 || duration_ps <= 0) return;
  const double mean_gap_ps = kPsPerSecond / rate_hz;
  const double limit = static_cast<double>(duration_ps);
  double t = 0.0;
  for (;;) {
    t += rng.exponential(mean_gap_ps);
    if (t > limit) break;
    times.push_back(static_cast<TimePs>(std::llround(t)));
    ids.push_back(kNoPair);
  }
}

// Non-paralyzable dead-time filter; drops events within dead_ps after an
// accepted event. Returns the number of surviving pair-photon events when
// the stream tracks origins, otherwise the number of survivors.
std::uint64_t dead_time_filter(EventStream& s, TimePs dead_ps) {
  std::uint64_t pair_survivors = 0;
  if (dead_ps <= 0) {
    if (!s.has_origins()) return s.size();
    for (auto id : s.pair_ids)
      if (id != kNoPair) ++pair_survivors;
    return pair_survivors;
  }
  std::size_t kept = 0;
  bool any = false;
  TimePs last_accepted = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const TimePs t = s.times[i];
    if (any && t - last_accepted < dead_ps) continue;
    s.times[kept] = t;
    if (s.has_origins()) {
      s.pair_ids[kept] = s.pair_ids[i];
      if (s.pair_ids[i] != kNoPair) ++pair_survivors;
    } else {
      ++pair_survivors;
    }
    last_accepted = t;
    any = true;
    ++kept;
  }
  s.times.resize(kept);
  if (s.has_origins()) s.pair_ids.resize(kept);
  return pair_survivors;
}

TimePs dead_time_ps(const model::DetectorParams& det) {
  return static_cast<TimePs>(std::llround(det.dead_time_ns * kPsPerNs));
}

} // namespace

double SplitRng::exponential(double mean) {
  return -std::log(uniform01_open_low()) * mean;
}

double SplitRng::gaussian(double sigma) {
  const double u1 = uniform01_open_low();
  const double u2 = uniform01();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt_a, std::uint64_t salt_b) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state ^= salt_a * 0xff51afd7ed558ccdULL;
  mixed ^= splitmix64(state);
  state ^= salt_b * 0xc4ceb9fe1a85ec53ULL;
  mixed ^= splitmix64(state);
  return mixed;
}

bool EventStream::is_sorted() const {
  return std::is_sorted(times.begin(), times.end());
}

void EventStream::check_invariants() const {
  if (!is_sorted()) throw std::invalid_argument("event stream timestamps are not sorted");
  if (!times.empty() && (times.front() < 0 || times.back() > duration_ps))
    throw std::invalid_argument("event stream timestamps outside [0, duration]");
  if (!pair_ids.empty() && pair_ids.size() != times.size())
    throw std::invalid_argument("pair id track must match the timestamp track");
}

SynthesizedPairs synthesize_pairs(const model::LinkScenario& scenario, double duration_s,
                                  std::uint64_t seed, std::uint64_t max_events) {
  scenario.validate();
  if (duration_s <= 0.0) throw std::invalid_argument("duration must be > 0");

  const double rate =
      scenario.source.brightness_pairs_per_s_per_mw * scenario.source.pump_power_mw;
  const TimePs duration_ps = static_cast<TimePs>(std::llround(duration_s * kPsPerSecond));

  SynthesizedPairs out;
  out.signal.channel_id = kSignalChannel;
  out.idler.channel_id = kIdlerChannel;
  out.signal.duration_ps = duration_ps;
  out.idler.duration_ps = duration_ps;
  if (rate <= 0.0) return out;

  const double expected = rate * duration_s;
  check_budget(static_cast<std::uint64_t>(expected + 6.0 * std::sqrt(expected) + 16.0),
               max_events);

  SplitRng emission(seed, Stage::kPairEmission, kSignalChannel);
  SplitRng spread(seed, Stage::kPairSpread, kIdlerChannel);
  const double mean_gap_ps = kPsPerSecond / rate;
  const double sigma_pair = scenario.source.pair_correlation_fwhm_ps / kFwhmPerSigma;
  const double limit = static_cast<double>(duration_ps);

  double t = 0.0;
  std::int64_t id = 0;
  for (;;) {
    t += emission.exponential(mean_gap_ps);
    if (t > limit) break;
    const TimePs ts = static_cast<TimePs>(std::llround(t));
    TimePs ti = ts;
    if (sigma_pair > 0.0)
      ti = clamp_to(ts + static_cast<TimePs>(std::llround(spread.gaussian(sigma_pair))),
                    duration_ps);
    out.signal.times.push_back(ts);
    out.signal.pair_ids.push_back(id);
    out.idler.times.push_back(ti);
    out.idler.pair_ids.push_back(id);
    ++id;
  }
  out.generated_pairs = static_cast<std::uint64_t>(id);
  check_budget(out.generated_pairs, max_events);
  sort_with_ids(out.idler); // the Gaussian spread can reorder dense streams
  return out;
}

EventStream thin(const EventStream& stream, double survival_probability, std::uint64_t seed) {
  if (survival_probability < 0.0 || survival_probability > 1.0)
    throw std::invalid_argument("survival probability must be within [0, 1]");
  EventStream out;
  out.channel_id = stream.channel_id;
  out.duration_ps = stream.duration_ps;
  SplitRng rng(seed, Stage::kUserThin, stream.channel_id);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!rng.bernoulli(survival_probability)) continue;
    out.times.push_back(stream.times[i]);
    if (stream.has_origins()) out.pair_ids.push_back(stream.pair_ids[i]);
  }
  return out;
}

EventStream apply_detector(const EventStream& stream, const model::DetectorParams& detector,
                           double duration_s, std::uint64_t seed) {
  detector.validate();
  const TimePs duration_ps = std::max<TimePs>(
      stream.duration_ps, static_cast<TimePs>(std::llround(duration_s * kPsPerSecond)));

  EventStream out;
  out.channel_id = stream.channel_id;
  out.duration_ps = duration_ps;
  const bool track = stream.has_origins() || detector.dark_rate_hz > 0.0 ||
                     detector.afterpulse_probability > 0.0;

  SplitRng thin_rng(seed, Stage::kDetectorThin, stream.channel_id);
  SplitRng jitter_rng(seed, Stage::kDetectorJitter, stream.channel_id);
  const double sigma = detector.jitter_fwhm_ps / kFwhmPerSigma;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (detector.efficiency < 1.0 && !thin_rng.bernoulli(detector.efficiency)) continue;
    TimePs t = stream.times[i];
    if (sigma > 0.0)
      t = clamp_to(t + static_cast<TimePs>(std::llround(jitter_rng.gaussian(sigma))),
                   duration_ps);
    out.times.push_back(t);
    if (track) out.pair_ids.push_back(stream.has_origins() ? stream.pair_ids[i] : kNoPair);
  }

  if (detector.dark_rate_hz > 0.0) {
    SplitRng dark_rng(seed, Stage::kDarkCounts, stream.channel_id);
    append_poisson(out.times, out.pair_ids, detector.dark_rate_hz, duration_ps, dark_rng);
  }
  sort_with_ids(out);

  if (detector.afterpulse_probability > 0.0) {
    SplitRng ap_rng(seed, Stage::kAfterpulse, stream.channel_id);
    const double tau_ps = detector.afterpulse_tau_ns * kPsPerNs;
    const TimePs dead = dead_time_ps(detector);
    std::vector<TimePs> pulses;
    for (TimePs t0 : out.times) {
      if (!ap_rng.bernoulli(detector.afterpulse_probability)) continue;
      const TimePs t =
          t0 + dead + static_cast<TimePs>(std::llround(ap_rng.exponential(tau_ps)));
      if (t <= duration_ps) pulses.push_back(t);
    }
    out.times.insert(out.times.end(), pulses.begin(), pulses.end());
    if (track) out.pair_ids.insert(out.pair_ids.end(), pulses.size(), kNoPair);
    sort_with_ids(out);
  }

  dead_time_filter(out, dead_time_ps(detector));
  return out;
}

EventStream delay_stream(const EventStream& stream, TimePs delay_ps) {
  if (delay_ps < 0) throw std::invalid_argument("delay must be >= 0");
  const TimePs headroom = std::numeric_limits<TimePs>::max() - delay_ps;
  if (stream.duration_ps > headroom || (!stream.empty() && stream.times.back() > headroom))
    throw std::overflow_error("timestamp overflow while delaying stream");
  EventStream out = stream;
  for (auto& t : out.times) t += delay_ps;
  out.duration_ps += delay_ps;
  return out;
}

LinkRealization simulate_link(const model::LinkScenario& scenario, double duration_s,
                              std::uint64_t seed, const SimulateOptions& options) {
  scenario.validate();
  if (duration_s <= 0.0) throw std::invalid_argument("duration must be > 0");
  const auto& src = scenario.source;
  const double pair_rate = src.brightness_pairs_per_s_per_mw * src.pump_power_mw;
  const TimePs duration_ps = static_cast<TimePs>(std::llround(duration_s * kPsPerSecond));

  LinkRealization out;
  out.report.seed = seed;
  out.report.duration_s = duration_s;
  out.signal.channel_id = kSignalChannel;
  out.idler.channel_id = kIdlerChannel;
  out.idler.duration_ps = duration_ps;

  // joint analyzer outcome table: (signal pass, idler pass) probabilities;
  // sampling the four outcomes jointly preserves the correlations
  double p_pp = 1.0, p_pf = 0.0, p_fp = 0.0;
  if (scenario.analyzer) {
    const double a = scenario.analyzer->signal_angle_deg;
    const double b = scenario.analyzer->idler_angle_deg;
    p_pp = model::coincidence_probability(a, b, src.intrinsic_visibility_hv,
                                          src.intrinsic_visibility_da);
    p_pf = model::coincidence_probability(a, b + 90.0, src.intrinsic_visibility_hv,
                                          src.intrinsic_visibility_da);
    p_fp = model::coincidence_probability(a + 90.0, b, src.intrinsic_visibility_hv,
                                          src.intrinsic_visibility_da);
  }

  const double fiber_t = model::fiber_transmission(scenario.fiber);
  const double fiber_jitter_fwhm =
      scenario.fiber.length_km > 0.0
          ? model::chromatic_broadening_ps(scenario.fiber, src.signal_center_wavelength_nm,
                                           src.signal_bandwidth_fwhm_nm)
          : 0.0;
  const TimePs fiber_delay_ps =
      static_cast<TimePs>(std::llround(model::propagation_delay_us(scenario.fiber) * kPsPerUs));
  const TimePs signal_duration_ps = duration_ps + fiber_delay_ps;
  out.signal.duration_ps = signal_duration_ps;

  SplitRng emission(seed, Stage::kPairEmission, kSignalChannel);
  SplitRng spread(seed, Stage::kPairSpread, kIdlerChannel);
  SplitRng analyzer_rng(seed, Stage::kAnalyzer, kSignalChannel);
  SplitRng path_s(seed, Stage::kPathLoss, kSignalChannel);
  SplitRng path_i(seed, Stage::kPathLoss, kIdlerChannel);
  SplitRng fiber_rng(seed, Stage::kFiberLoss, kSignalChannel);
  SplitRng fiber_jitter_rng(seed, Stage::kFiberJitter, kSignalChannel);
  SplitRng det_thin_s(seed, Stage::kDetectorThin, kSignalChannel);
  SplitRng det_thin_i(seed, Stage::kDetectorThin, kIdlerChannel);
  SplitRng det_jitter_s(seed, Stage::kDetectorJitter, kSignalChannel);
  SplitRng det_jitter_i(seed, Stage::kDetectorJitter, kIdlerChannel);

  const double sigma_pair = src.pair_correlation_fwhm_ps / kFwhmPerSigma;
  const double sigma_fiber = fiber_jitter_fwhm / kFwhmPerSigma;
  const double sigma_det_s = scenario.detector_signal.jitter_fwhm_ps / kFwhmPerSigma;
  const double sigma_det_i = scenario.detector_idler.jitter_fwhm_ps / kFwhmPerSigma;

  auto& rs = out.report.signal;
  auto& ri = out.report.idler;

  // per-pair survival through every loss stage; only survivors are stored
  if (pair_rate > 0.0) {
    const double mean_gap_ps = kPsPerSecond / pair_rate;
    const double limit = static_cast<double>(duration_ps);
    double t = 0.0;
    std::int64_t id = 0;
    for (;;) {
      t += emission.exponential(mean_gap_ps);
      if (t > limit) break;
      const TimePs ts_emit = static_cast<TimePs>(std::llround(t));
      TimePs ti_emit = ts_emit;
      if (sigma_pair > 0.0)
        ti_emit = clamp_to(
            ts_emit + static_cast<TimePs>(std::llround(spread.gaussian(sigma_pair))),
            duration_ps);
      const std::int64_t pair_id = id++;

      bool keep_s = true;
      bool keep_i = true;
      if (scenario.analyzer) {
        const double u = analyzer_rng.uniform01();
        keep_s = u < p_pp + p_pf;
        keep_i = u < p_pp || (u >= p_pp + p_pf && u < p_pp + p_pf + p_fp);
      }
      if (keep_s) ++rs.after_analyzer;
      if (keep_i) ++ri.after_analyzer;

      keep_s = keep_s && path_s.bernoulli(scenario.path_efficiency_signal);
      keep_i = keep_i && path_i.bernoulli(scenario.path_efficiency_idler);
      if (keep_s) ++rs.after_path_loss;
      if (keep_i) ++ri.after_path_loss;

      keep_s = keep_s && (fiber_t >= 1.0 || fiber_rng.bernoulli(fiber_t));
      if (keep_s) ++rs.after_fiber_loss;

      keep_s = keep_s && det_thin_s.bernoulli(scenario.detector_signal.efficiency);
      keep_i = keep_i && det_thin_i.bernoulli(scenario.detector_idler.efficiency);

      if (keep_s) {
        ++rs.after_detector_efficiency;
        double shift = 0.0;
        if (sigma_fiber > 0.0) shift += fiber_jitter_rng.gaussian(sigma_fiber);
        if (sigma_det_s > 0.0) shift += det_jitter_s.gaussian(sigma_det_s);
        out.signal.times.push_back(
            clamp_to(ts_emit + static_cast<TimePs>(std::llround(shift)) + fiber_delay_ps,
                     signal_duration_ps));
        out.signal.pair_ids.push_back(pair_id);
        check_budget(out.signal.size(), options.max_events);
      }
      if (keep_i) {
        ++ri.after_detector_efficiency;
        TimePs ti = ti_emit;
        if (sigma_det_i > 0.0)
          ti = clamp_to(
              ti + static_cast<TimePs>(std::llround(det_jitter_i.gaussian(sigma_det_i))),
              duration_ps);
        out.idler.times.push_back(ti);
        out.idler.pair_ids.push_back(pair_id);
        check_budget(out.idler.size(), options.max_events);
      }
    }
    out.report.generated_pairs = static_cast<std::uint64_t>(id);
  }
  ri.after_fiber_loss = ri.after_path_loss; // no fiber on the idler arm

  auto finish_arm = [&](EventStream& s, ArmReport& rep, const model::DetectorParams& det,
                        TimePs arm_duration) {
    if (det.dark_rate_hz > 0.0) {
      SplitRng dark_rng(seed, Stage::kDarkCounts, s.channel_id);
      const std::size_t before = s.size();
      append_poisson(s.times, s.pair_ids, det.dark_rate_hz, arm_duration, dark_rng);
      rep.dark_events = s.size() - before;
      check_budget(s.size(), options.max_events);
    }
    sort_with_ids(s);
    rep.after_dead_time = dead_time_filter(s, dead_time_ps(det));
    rep.final_events = s.size();
    if (!options.track_origins) s.pair_ids.clear();
  };
  finish_arm(out.signal, rs, scenario.detector_signal, signal_duration_ps);
  finish_arm(out.idler, ri, scenario.detector_idler, duration_ps);

  return out;
}

} // namespace plink::simkit
