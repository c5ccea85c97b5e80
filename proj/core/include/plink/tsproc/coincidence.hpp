#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "plink/simkit/event_stream.hpp"
#include "plink/units.hpp"

namespace plink::tsproc {

using simkit::EventStream;

struct CoincidenceResult {
  std::uint64_t count = 0;
  double rate_hz = 0.0;
  double window_ns = 0.0;
  TimePs applied_offset_ps = 0;
  // Matched (index in a, index in b) pairs; filled only on request.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> matches;
};

// Greedy earliest-first one-to-one matching of events with
// |t_b - t_a - offset| <= window/2 (closed window). Linear-time two-pointer
// pass over the sorted streams. Throws on unsorted input.
CoincidenceResult find_coincidences(const EventStream& a, const EventStream& b,
                                    double window_ns, TimePs offset_ps,
                                    bool collect_matches = false);

struct CorrelationHistogram {
  std::int64_t bin_width_ps = 1;
  TimePs min_dt_ps = 0; // inclusive lower edge of the first bin
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  TimePs max_dt_ps() const {
    return min_dt_ps + static_cast<TimePs>(bin_width_ps) * static_cast<TimePs>(counts.size());
  }
  double bin_center_ps(std::size_t i) const {
    return static_cast<double>(min_dt_ps) + (static_cast<double>(i) + 0.5) * static_cast<double>(bin_width_ps);
  }
};

// Histogram of all pairwise differences t_b - t_a - offset inside
// [min_dt, max_dt), single sliding-window pass.
CorrelationHistogram correlation_histogram(const EventStream& a, const EventStream& b,
                                           std::int64_t bin_width_ps, TimePs min_dt_ps,
                                           TimePs max_dt_ps, TimePs offset_ps = 0);

struct OffsetScan {
  bool found = false;
  TimePs offset_ps = 0;
  double significance = 0.0; // peak / mean background of the final pass
  std::int64_t final_bin_ps = 0;
};

inline constexpr double kOffsetSignificanceThreshold = 5.0;

// Coarse-to-fine search for the relative delay between two streams.
// A coarse histogram over +-search_span locates the peak, then the bin width
// is refined down to <=10 ps. found == false when the final peak/background
// ratio stays below the threshold.
OffsetScan find_offset(const EventStream& a, const EventStream& b, double search_span_s,
                       double coarse_bin_ns);

// Coincidence rate in a window of the same width displaced from the main
// window; estimator of the accidental rate. Throws if the displaced window
// overlaps the main one (|displacement| must exceed the window).
double displaced_window_rate(const EventStream& a, const EventStream& b, double window_ns,
                             TimePs offset_ps, double displacement_ns);

} // namespace plink::tsproc
