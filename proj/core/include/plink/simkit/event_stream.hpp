#pragma once
#include <cstdint>
#include <vector>

#include "plink/units.hpp"

namespace plink::simkit {

inline constexpr std::int64_t kNoPair = -1;

// One detector channel: sorted photodetection timestamps in integer ps.
// pair_ids, when present, has one entry per event: the index of the emitted
// pair the event descends from, or kNoPair for dark/afterpulse events.
struct EventStream {
  std::uint16_t channel_id = 0;
  TimePs duration_ps = 0;
  std::vector<TimePs> times;
  std::vector<std::int64_t> pair_ids;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  bool has_origins() const { return !pair_ids.empty(); }
  double duration_s() const { return ps_to_seconds(duration_ps); }

  bool is_sorted() const;
  // Throws std::invalid_argument on unsorted times or out-of-range entries.
  void check_invariants() const;
};

} // namespace plink::simkit
