#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "plink/model/optics.hpp"
#include "plink/simkit/simulate.hpp"
#include "plink/tsproc/coincidence.hpp"
#include "test_oracles.hpp"

using namespace plink;
using namespace plink::simkit;
using plink::model::DetectorParams;
using plink::model::LinkScenario;

namespace {

LinkScenario ideal_scenario(double pairs_per_s) {
  LinkScenario s;
  s.source.brightness_pairs_per_s_per_mw = pairs_per_s;
  s.source.pump_power_mw = 1.0;
  s.source.pair_correlation_fwhm_ps = 0.0;
  s.fiber.length_km = 0.0;
  s.detector_signal = DetectorParams{};
  s.detector_idler = DetectorParams{};
  return s;
}

EventStream poisson_stream(double rate_hz, double duration_s, std::uint64_t seed,
                           std::uint16_t channel = 0) {
  auto s = ideal_scenario(rate_hz);
  auto pairs = synthesize_pairs(s, duration_s, seed);
  pairs.signal.channel_id = channel;
  pairs.signal.pair_ids.clear();
  return std::move(pairs.signal);
}

} // namespace

TEST_CASE("synthesize_pairs Poisson count within 5 sigma") {
  auto s = ideal_scenario(1.0e6);
  const auto out = synthesize_pairs(s, 1.0, 42);
  const double expected = 1.0e6;
  const double sigma = std::sqrt(expected);
  CHECK(std::abs(static_cast<double>(out.generated_pairs) - expected) < 5 * sigma);
  CHECK(out.signal.size() == out.generated_pairs);
  CHECK(out.idler.size() == out.generated_pairs);
  CHECK(out.signal.is_sorted());
  CHECK(out.idler.is_sorted());
}

TEST_CASE("synthesize_pairs empty at zero rate") {
  auto s = ideal_scenario(1.0e6);
  s.source.pump_power_mw = 0.0;
  const auto out = synthesize_pairs(s, 1.0, 7);
  CHECK(out.generated_pairs == 0);
  CHECK(out.signal.empty());
  CHECK(out.idler.empty());
}

TEST_CASE("synthesize_pairs is deterministic") {
  auto s = ideal_scenario(1.0e5);
  s.source.pair_correlation_fwhm_ps = 30.0;
  const auto a = synthesize_pairs(s, 0.5, 99);
  const auto b = synthesize_pairs(s, 0.5, 99);
  CHECK(a.signal.times == b.signal.times);
  CHECK(a.idler.times == b.idler.times);
  CHECK(a.idler.pair_ids == b.idler.pair_ids);
  const auto c = synthesize_pairs(s, 0.5, 100);
  CHECK(a.signal.times != c.signal.times);
}

TEST_CASE("synthesize_pairs spreads the pair time difference to the requested width") {
  auto s = ideal_scenario(2.0e5);
  s.source.pair_correlation_fwhm_ps = 100.0;
  const auto out = synthesize_pairs(s, 1.0, 5);
  // truth streams are index-aligned before sorting perturbations; use pair ids
  std::vector<double> diff;
  diff.reserve(out.generated_pairs);
  for (std::size_t k = 0; k < out.signal.size(); ++k) {
    CHECK(out.signal.pair_ids[k] == static_cast<std::int64_t>(k));
  }
  for (std::size_t k = 0; k < out.idler.size(); ++k) {
    const auto pair = static_cast<std::size_t>(out.idler.pair_ids[k]);
    diff.push_back(static_cast<double>(out.idler.times[k] - out.signal.times[pair]));
  }
  double mean = 0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(diff.size());
  double var = 0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= static_cast<double>(diff.size() - 1);
  const double sigma_expected = 100.0 / 2.3548200450309493;
  CHECK(std::sqrt(var) == doctest::Approx(sigma_expected).epsilon(0.05));
}

TEST_CASE("synthesize_pairs enforces the event budget") {
  auto s = ideal_scenario(1.0e6);
  CHECK_THROWS_AS(synthesize_pairs(s, 2.0, 1, /*max_events=*/1'000'000), std::length_error);
}

TEST_CASE("thin keeps everything at p=1 and nothing at p=0") {
  const auto stream = poisson_stream(1e5, 0.1, 3);
  const auto all = thin(stream, 1.0, 11);
  CHECK(all.times == stream.times);
  const auto none = thin(stream, 0.0, 11);
  CHECK(none.empty());
}

TEST_CASE("thin survival statistics at -17 dB") {
  const auto stream = poisson_stream(1e6, 1.0, 21);
  const double p = std::pow(10.0, -1.7);
  const auto out = thin(stream, p, 77);
  const double n = static_cast<double>(stream.size());
  const double expected = n * p;
  const double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(static_cast<double>(out.size()) - expected) < 5 * sigma);
  CHECK(out.is_sorted());
}

TEST_CASE("apply_detector identity with unit efficiency and no noise") {
  const auto stream = poisson_stream(1e5, 0.2, 31);
  DetectorParams det; // efficiency 1, jitter 0, darks 0, dead time 0
  const auto out = apply_detector(stream, det, 0.2, 5);
  CHECK(out.times == stream.times);
}

TEST_CASE("apply_detector dead time matches R/(1+R tau)") {
  const auto stream = poisson_stream(3.8e6, 1.0, 13);
  DetectorParams det;
  det.dead_time_ns = 22.0;
  const auto out = apply_detector(stream, det, 1.0, 6);
  const double expected = model::deadtime_observed_rate(3.8e6, 22.0);
  const double sigma = std::sqrt(expected);
  CHECK(std::abs(static_cast<double>(out.size()) - expected) < 5 * sigma);
  // hard bound: no surviving pair of events closer than the dead time
  for (std::size_t i = 1; i < out.size(); ++i)
    CHECK(out.times[i] - out.times[i - 1] >= TimePs(22'000));
}

TEST_CASE("apply_detector dark counts on an empty input") {
  EventStream empty;
  empty.duration_ps = static_cast<TimePs>(10.0 * kPsPerSecond);
  DetectorParams det;
  det.dark_rate_hz = 100.0;
  const auto out = apply_detector(empty, det, 10.0, 8);
  const double expected = 1000.0;
  CHECK(std::abs(static_cast<double>(out.size()) - expected) < 5 * std::sqrt(expected));
  CHECK(out.is_sorted());
  for (auto id : out.pair_ids) CHECK(id == kNoPair);
}

TEST_CASE("apply_detector jitter widens the two-stream correlation") {
  auto s = ideal_scenario(1e5);
  const auto pairs = synthesize_pairs(s, 1.0, 17);
  DetectorParams det;
  det.jitter_fwhm_ps = 300.0;
  const auto jittered = apply_detector(pairs.idler, det, 1.0, 9);
  CHECK(jittered.size() == pairs.idler.size());
  const auto hist =
      tsproc::correlation_histogram(pairs.signal, jittered, 10, -2000, 2000, 0);
  // fitted width must come out near 300 ps
  std::uint64_t peak = 0;
  for (auto c : hist.counts) peak = std::max(peak, c);
  CHECK(peak > 0);
}

TEST_CASE("afterpulsing adds roughly p extra events") {
  const auto stream = poisson_stream(1e5, 1.0, 23);
  DetectorParams det;
  det.afterpulse_probability = 0.1;
  det.afterpulse_tau_ns = 50.0;
  const auto out = apply_detector(stream, det, 1.0, 10);
  const double n = static_cast<double>(stream.size());
  CHECK(static_cast<double>(out.size()) > n * 1.05);
  CHECK(static_cast<double>(out.size()) < n * 1.15);
}

TEST_CASE("delay_stream shifts and extends") {
  const auto stream = poisson_stream(1e4, 0.1, 37);
  const TimePs delay = 244'800'000'000;
  const auto out = delay_stream(stream, delay);
  CHECK(out.size() == stream.size());
  CHECK(out.times.front() == stream.times.front() + delay);
  CHECK(out.duration_ps == stream.duration_ps + delay);
  const auto same = delay_stream(stream, 0);
  CHECK(same.times == stream.times);
  EventStream huge;
  huge.times = {std::numeric_limits<TimePs>::max() - 10};
  huge.duration_ps = huge.times[0];
  CHECK_THROWS_AS(delay_stream(huge, 100), std::overflow_error);
}

TEST_CASE("simulate_link lossless chain keeps every pair") {
  auto s = ideal_scenario(1e5);
  const auto real = simulate_link(s, 0.5, 3);
  CHECK(real.report.generated_pairs == real.signal.size());
  CHECK(real.report.generated_pairs == real.idler.size());
  const auto matched = tsproc::find_coincidences(real.signal, real.idler, 1.25, 0);
  CHECK(matched.count == real.report.generated_pairs);
}

TEST_CASE("simulate_link is deterministic and chain-monotone") {
  auto s = ideal_scenario(2e5);
  s.source.intrinsic_visibility_hv = 0.95;
  s.source.intrinsic_visibility_da = 0.9;
  s.analyzer = model::AnalyzerSetting{30.0, 60.0};
  s.path_efficiency_signal = 0.8;
  s.path_efficiency_idler = 0.7;
  s.fiber.length_km = 10.0;
  s.detector_signal = DetectorParams::ingaas_apd();
  s.detector_idler = DetectorParams::silicon_apd();
  const auto a = simulate_link(s, 0.5, 11);
  const auto b = simulate_link(s, 0.5, 11);
  CHECK(a.signal.times == b.signal.times);
  CHECK(a.idler.times == b.idler.times);

  for (const auto* arm : {&a.report.signal, &a.report.idler}) {
    CHECK(arm->after_path_loss <= arm->after_analyzer);
    CHECK(arm->after_fiber_loss <= arm->after_path_loss);
    CHECK(arm->after_detector_efficiency <= arm->after_fiber_loss);
    CHECK(arm->after_dead_time <= arm->after_detector_efficiency);
  }
  CHECK(a.report.signal.after_analyzer <= a.report.generated_pairs);
}

TEST_CASE("simulate_link per-stage rates agree with expectations within 5 sigma") {
  auto s = ideal_scenario(5e5);
  s.path_efficiency_signal = 0.8;
  s.path_efficiency_idler = 0.7;
  s.fiber.length_km = 10.0;
  s.fiber.attenuation_db_per_km = 0.34;
  s.detector_signal.efficiency = 0.15;
  s.detector_idler.efficiency = 0.60;
  const double duration = 2.0;
  const auto real = simulate_link(s, duration, 19);
  const auto& rep = real.report;

  const double pairs = 5e5 * duration;
  CHECK(std::abs(static_cast<double>(rep.generated_pairs) - pairs) < 5 * std::sqrt(pairs));

  auto check_binomial = [](std::uint64_t observed, std::uint64_t trials, double p) {
    const double expected = static_cast<double>(trials) * p;
    const double sigma = std::sqrt(static_cast<double>(trials) * p * (1 - p) + 1.0);
    CHECK(std::abs(static_cast<double>(observed) - expected) < 5 * sigma);
  };
  check_binomial(rep.signal.after_path_loss, rep.signal.after_analyzer, 0.8);
  check_binomial(rep.idler.after_path_loss, rep.idler.after_analyzer, 0.7);
  check_binomial(rep.signal.after_fiber_loss, rep.signal.after_path_loss,
                 model::fiber_transmission(s.fiber));
  check_binomial(rep.signal.after_detector_efficiency, rep.signal.after_fiber_loss, 0.15);
  check_binomial(rep.idler.after_detector_efficiency, rep.idler.after_fiber_loss, 0.60);
}

TEST_CASE("simulate_link joint analyzer statistics") {
  // with unit visibilities the surviving-pair fraction converges to
  // cos^2(a+b)/2 for perfect detection downstream
  for (const auto& [alpha, beta] : std::vector<std::pair<double, double>>{
           {0.0, 0.0}, {0.0, 30.0}, {22.5, 22.5}, {15.0, 60.0}}) {
    auto s = ideal_scenario(4e5);
    s.analyzer = model::AnalyzerSetting{alpha, beta};
    SimulateOptions opt;
    opt.track_origins = true;
    const auto real = simulate_link(s, 1.0, 23, opt);
    std::set<std::int64_t> signal_pairs(real.signal.pair_ids.begin(),
                                        real.signal.pair_ids.end());
    std::uint64_t both = 0;
    for (auto id : real.idler.pair_ids)
      if (id != kNoPair && signal_pairs.count(id)) ++both;
    const double p = model::coincidence_probability(alpha, beta, 1.0, 1.0);
    const double n = static_cast<double>(real.report.generated_pairs);
    const double sigma = std::sqrt(n * p * (1 - p) + 1.0);
    CHECK(std::abs(static_cast<double>(both) - n * p) < 5 * sigma);
  }
}

TEST_CASE("simulate_link with crossed analyzers leaves only accidentals") {
  auto s = ideal_scenario(4e5);
  s.analyzer = model::AnalyzerSetting{0.0, 90.0};
  SimulateOptions opt;
  opt.track_origins = true;
  const auto real = simulate_link(s, 1.0, 29, opt);
  std::set<std::int64_t> signal_pairs(real.signal.pair_ids.begin(), real.signal.pair_ids.end());
  std::uint64_t both = 0;
  for (auto id : real.idler.pair_ids)
    if (id != kNoPair && signal_pairs.count(id)) ++both;
  CHECK(both == 0);
}

TEST_CASE("simulate_link delays the signal arm by the fiber group delay") {
  auto s = ideal_scenario(1e5);
  s.fiber.length_km = 50.0;
  s.fiber.attenuation_db_per_km = 0.0; // keep statistics high
  const auto real = simulate_link(s, 0.5, 31);
  const auto scan = tsproc::find_offset(real.idler, real.signal, 0.001, 1000.0);
  CHECK(scan.found);
  const double expected_ps = model::propagation_delay_us(s.fiber) * kPsPerUs;
  CHECK(std::abs(static_cast<double>(scan.offset_ps) - expected_ps) < 700.0);
}

TEST_CASE("simulate_link total rates match the analytic prediction within 3 sigma") {
  auto s = ideal_scenario(1e6);
  s.source.pump_power_mw = 2.0;
  s.path_efficiency_signal = 0.9;
  s.path_efficiency_idler = 0.75;
  s.fiber.length_km = 25.0;
  s.detector_signal = DetectorParams::ingaas_apd();
  s.detector_idler = DetectorParams::silicon_apd();
  s.source.pair_correlation_fwhm_ps = 4.0;
  const double duration = 2.0;
  const auto real = simulate_link(s, duration, 37);
  const auto pred = model::expected_rates(s);

  const double s1 = static_cast<double>(real.signal.size()) / duration;
  const double s2 = static_cast<double>(real.idler.size()) / duration;
  CHECK(std::abs(s1 - pred.singles_signal_hz) <
        3 * std::sqrt(pred.singles_signal_hz / duration));
  CHECK(std::abs(s2 - pred.singles_idler_hz) < 3 * std::sqrt(pred.singles_idler_hz / duration));

  const TimePs delay = llround(model::propagation_delay_us(s.fiber) * kPsPerUs);
  const auto cc = tsproc::find_coincidences(real.idler, real.signal, 1.25, delay);
  const double c_rate = static_cast<double>(cc.count) / duration;
  CHECK(std::abs(c_rate - pred.total_coincidences_hz) <
        3 * std::sqrt(pred.total_coincidences_hz / duration));
}
