#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "plink/simkit/simulate.hpp"
#include "plink/tsproc/coincidence.hpp"
#include "plink/tsproc/stream_io.hpp"
#include "test_oracles.hpp"

using namespace plink;
using namespace plink::tsproc;
using plink::simkit::EventStream;

namespace {

EventStream make_stream(std::vector<TimePs> times, std::uint16_t channel = 0) {
  EventStream s;
  s.channel_id = channel;
  s.times = std::move(times);
  s.duration_ps = s.times.empty() ? 0 : s.times.back();
  return s;
}

EventStream poisson(double rate_hz, double duration_s, std::uint64_t seed,
                    std::uint16_t channel = 0) {
  model::LinkScenario sc;
  sc.source.brightness_pairs_per_s_per_mw = rate_hz;
  sc.source.pump_power_mw = 1.0;
  sc.source.pair_correlation_fwhm_ps = 0.0;
  auto pairs = simkit::synthesize_pairs(sc, duration_s, seed);
  pairs.signal.channel_id = channel;
  pairs.signal.pair_ids.clear();
  return std::move(pairs.signal);
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("find_coincidences basic windows") {
  const auto a = make_stream({0});
  const auto b = make_stream({400}, 1);
  CHECK(find_coincidences(a, b, 1.25, 400).count == 1);
  CHECK(find_coincidences(a, b, 1.25, 0).count == 1); // |400| <= 625
  CHECK(find_coincidences(a, b, 0.5, 0).count == 0);

  const auto a2 = make_stream({0, 10'000});
  const auto b2 = make_stream({500}, 1);
  CHECK(find_coincidences(a2, b2, 1.25, 0).count == 1);

  // same stream against itself matches every record
  const auto big = poisson(1e5, 0.1, 3);
  CHECK(find_coincidences(big, big, 1.25, 0).count == big.size());
}

TEST_CASE("find_coincidences rejects unsorted input") {
  EventStream bad;
  bad.times = {10, 5};
  bad.duration_ps = 10;
  const auto good = make_stream({1});
  CHECK_THROWS_AS(find_coincidences(bad, good, 1.0, 0), std::invalid_argument);
}

TEST_CASE("find_coincidences equals the brute-force greedy matcher") {
  testing::TestRand rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(2000);
    const std::size_t m = 1 + rng.below(2000);
    const TimePs span = 1 + static_cast<TimePs>(rng.below(2'000'000));
    const auto ta = testing::random_sorted_times(rng, n, span);
    const auto tb = testing::random_sorted_times(rng, m, span);
    const double window_ns = 0.05 + rng.uniform() * 3.0;
    const TimePs offset = static_cast<TimePs>(rng.below(2000)) - 1000;
    const TimePs half = static_cast<TimePs>(std::llround(window_ns * 500.0));

    const auto got = find_coincidences(make_stream(ta), make_stream(tb, 1), window_ns, offset);
    const auto expected = testing::brute_force_matches(ta, tb, half, offset);
    REQUIRE(got.count == expected);
  }
}

TEST_CASE("find_coincidences symmetry and window monotonicity") {
  testing::TestRand rng(7);
  const auto a = poisson(2e5, 0.05, 5);
  const auto b = poisson(2e5, 0.05, 6, 1);
  for (double w : {0.1, 0.5, 1.25, 3.0}) {
    for (TimePs d : {TimePs(0), TimePs(313), TimePs(-4000)}) {
      CHECK(find_coincidences(a, b, w, d).count == find_coincidences(b, a, w, -d).count);
    }
  }
  std::uint64_t prev = 0;
  for (double w = 0.1; w < 10.0; w *= 1.7) {
    const auto c = find_coincidences(a, b, w, 0).count;
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("find_coincidences translation invariance") {
  const auto a = poisson(1e5, 0.05, 11);
  const auto b = poisson(1e5, 0.05, 12, 1);
  const auto base = find_coincidences(a, b, 1.25, 0).count;
  const TimePs shift = 777'777;
  const auto a2 = simkit::delay_stream(a, shift);
  const auto b2 = simkit::delay_stream(b, shift);
  CHECK(find_coincidences(a2, b2, 1.25, 0).count == base);
  // shifting only b moves the matching offset by exactly the shift
  CHECK(find_coincidences(a, b2, 1.25, shift).count == base);
}

TEST_CASE("find_coincidences collects one-to-one matches, earliest first") {
  const auto a = make_stream({0, 100, 120});
  const auto b = make_stream({90, 110}, 1);
  const auto r = find_coincidences(a, b, 0.06, 0, true); // half window 30 ps
  REQUIRE(r.count == 2);
  REQUIRE(r.matches.size() == 2);
  // a=100 takes the earliest in-window b (90), leaving 110 for a=120
  CHECK(r.matches[0] == std::pair<std::uint32_t, std::uint32_t>{1, 0});
  CHECK(r.matches[1] == std::pair<std::uint32_t, std::uint32_t>{2, 1});
}

TEST_CASE("correlation_histogram mass against brute force") {
  testing::TestRand rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(800);
    const std::size_t m = 1 + rng.below(800);
    const auto ta = testing::random_sorted_times(rng, n, 500'000);
    const auto tb = testing::random_sorted_times(rng, m, 500'000);
    const TimePs lo = -static_cast<TimePs>(rng.below(5000)) - 10;
    const TimePs hi = static_cast<TimePs>(rng.below(5000)) + 10;
    const std::int64_t bw = 1 + static_cast<std::int64_t>(rng.below(300));
    const TimePs offset = static_cast<TimePs>(rng.below(200)) - 100;

    const auto h =
        correlation_histogram(make_stream(ta), make_stream(tb, 1), bw, lo, hi, offset);
    std::uint64_t sum = 0;
    for (auto c : h.counts) sum += c;
    CHECK(sum == h.total);
    const auto expected = testing::brute_force_in_range(ta, tb, h.min_dt_ps, h.max_dt_ps(), offset);
    REQUIRE(h.total == expected);
  }
}

TEST_CASE("correlation_histogram of a sparse stream with itself peaks at zero") {
  const auto a = make_stream({0, 1'000'000, 2'000'000, 3'000'000});
  const auto h = correlation_histogram(a, a, 100, -5000, 5000, 0);
  CHECK(h.total == 4);
  std::uint64_t nonzero_bins = 0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] > 0) {
      ++nonzero_bins;
      CHECK(h.bin_center_ps(i) > -100);
      CHECK(h.bin_center_ps(i) < 100);
    }
  }
  CHECK(nonzero_bins == 1);
}

TEST_CASE("find_offset recovers a constructed delay") {
  // one-way delay of 50 km of fiber, ~244.8 us
  const auto a = poisson(5e4, 0.5, 21);
  const auto b = simkit::delay_stream(a, 244'786'011);
  const auto scan = find_offset(a, b, 0.0005, 1000.0);
  REQUIRE(scan.found);
  CHECK(scan.significance > kOffsetSignificanceThreshold);
  CHECK(std::abs(scan.offset_ps - 244'786'011) <= scan.final_bin_ps);
}

TEST_CASE("find_offset rejects independent streams") {
  const auto a = poisson(1e5, 0.2, 31);
  const auto b = poisson(1e5, 0.2, 32, 1);
  const auto scan = find_offset(a, b, 0.0002, 100.0);
  CHECK_FALSE(scan.found);
}

TEST_CASE("find_offset zero-delay streams") {
  const auto a = poisson(5e4, 0.5, 41);
  const auto b = thin(a, 0.7, 55);
  const auto scan = find_offset(a, b, 0.0005, 1000.0);
  REQUIRE(scan.found);
  CHECK(std::abs(scan.offset_ps) <= scan.final_bin_ps);
}

TEST_CASE("find_offset shifts with a translated stream") {
  const auto a = poisson(5e4, 0.5, 45);
  const auto b = thin(a, 0.6, 46);
  const auto base = find_offset(a, b, 0.0005, 1000.0);
  REQUIRE(base.found);
  const TimePs shift = 31'415'926;
  const auto moved = find_offset(a, simkit::delay_stream(b, shift), 0.0005, 1000.0);
  REQUIRE(moved.found);
  CHECK(std::abs((moved.offset_ps - base.offset_ps) - shift) <= moved.final_bin_ps);
  // translating both streams changes nothing
  const auto both = find_offset(simkit::delay_stream(a, shift),
                                simkit::delay_stream(b, shift), 0.0005, 1000.0);
  REQUIRE(both.found);
  CHECK(both.offset_ps == base.offset_ps);
}

TEST_CASE("csv reader error contracts") {
  const auto path = temp_file("plink_test_bad.csv");
  {
    std::ofstream f(path);
    f << "# channel=2\n100\nnot-a-number\n300\n";
  }
  try {
    read_stream_csv(path);
    FAIL("expected malformed-record error");
  } catch (const StreamFormatError& e) {
    CHECK(e.record_index() == 1);
  }
  {
    std::ofstream f(path);
    f << "# channel=2\n100\n50\n";
  }
  try {
    read_stream_csv(path);
    FAIL("expected monotonicity error");
  } catch (const StreamFormatError& e) {
    CHECK(e.kind() == StreamFormatError::Kind::kNonMonotonic);
    CHECK(e.record_index() == 1);
  }
  std::filesystem::remove(path);
}

TEST_CASE("displaced_window_rate estimates the accidental floor") {
  const double s_rate = 1e5;
  const double duration = 10.0;
  const auto a = poisson(s_rate, duration, 61);
  const auto b = poisson(s_rate, duration, 62, 1);
  const double expected = s_rate * s_rate * 1.25e-9; // 12.5 per second
  const double got = displaced_window_rate(a, b, 1.25, 0, 7.0);
  const double sigma = std::sqrt(expected / duration);
  CHECK(std::abs(got - expected) < 5 * sigma);
}

TEST_CASE("displaced_window_rate rejects overlapping windows") {
  const auto a = poisson(1e4, 0.1, 71);
  const auto b = poisson(1e4, 0.1, 72, 1);
  CHECK_THROWS_AS(displaced_window_rate(a, b, 1.25, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(displaced_window_rate(a, b, 1.25, 0, 1.0), std::invalid_argument);
  CHECK_NOTHROW(displaced_window_rate(a, b, 1.25, 0, -7.0));
}

TEST_CASE("binary stream round trip") {
  const auto path = temp_file("plink_test_roundtrip.plnk");
  const auto original = poisson(1e5, 0.05, 81, 3);
  write_stream(original, path);
  const auto loaded = read_stream(path);
  CHECK(loaded.channel_id == original.channel_id);
  CHECK(loaded.times == original.times);

  EventStream empty;
  empty.channel_id = 9;
  write_stream(empty, path);
  const auto loaded_empty = read_stream(path);
  CHECK(loaded_empty.empty());
  CHECK(loaded_empty.channel_id == 9);
  std::filesystem::remove(path);
}

TEST_CASE("csv stream round trip") {
  const auto path = temp_file("plink_test_roundtrip.csv");
  const auto original = poisson(1e4, 0.05, 91, 2);
  write_stream_csv(original, path);
  const auto loaded = read_stream_csv(path);
  CHECK(loaded.channel_id == original.channel_id);
  CHECK(loaded.times == original.times);
  std::filesystem::remove(path);
}

TEST_CASE("binary reader error contracts") {
  const auto path = temp_file("plink_test_bad.plnk");

  { // bad magic
    std::ofstream f(path, std::ios::binary);
    f.write("JUNKJUNKJUNKJUNK", 16);
  }
  CHECK_THROWS_AS(read_stream(path), StreamFormatError);
  try {
    read_stream(path);
  } catch (const StreamFormatError& e) {
    CHECK(e.kind() == StreamFormatError::Kind::kBadHeader);
  }

  { // truncated record block: header promises 3 records, file carries 1
    const auto good = make_stream({100, 200, 300}, 1);
    write_stream(good, path);
    std::filesystem::resize_file(path, 16 + 8);
  }
  try {
    read_stream(path);
    FAIL("expected truncation error");
  } catch (const StreamFormatError& e) {
    CHECK(e.kind() == StreamFormatError::Kind::kTruncated);
  }

  { // non-monotone timestamps, offending record named
    std::ofstream f(path, std::ios::binary);
    const char magic[4] = {'P', 'L', 'N', 'K'};
    const std::uint16_t version = 1, channel = 0;
    const std::uint64_t count = 3;
    f.write(magic, 4);
    f.write(reinterpret_cast<const char*>(&version), 2);
    f.write(reinterpret_cast<const char*>(&channel), 2);
    f.write(reinterpret_cast<const char*>(&count), 8);
    for (std::uint64_t t : {std::uint64_t{100}, std::uint64_t{50}, std::uint64_t{200}})
      f.write(reinterpret_cast<const char*>(&t), 8);
  }
  try {
    read_stream(path);
    FAIL("expected monotonicity error");
  } catch (const StreamFormatError& e) {
    CHECK(e.kind() == StreamFormatError::Kind::kNonMonotonic);
    CHECK(e.record_index() == 1);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("histogram csv export") {
  const auto a = make_stream({0, 1000});
  const auto h = correlation_histogram(a, a, 500, -1000, 1000, 0);
  const auto path = temp_file("plink_test_hist.csv");
  write_histogram_csv(h, path);
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  CHECK(line == "bin_center_ps,count");
  std::size_t rows = 0;
  while (std::getline(f, line))
    if (!line.empty()) ++rows;
  CHECK(rows == h.counts.size());
  std::filesystem::remove(path);
}
