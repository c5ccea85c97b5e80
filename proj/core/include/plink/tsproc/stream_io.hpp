#pragma once
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "plink/simkit/event_stream.hpp"
#include "plink/tsproc/coincidence.hpp"

namespace plink::tsproc {

// Binary timestamp file, little-endian:
//   magic "PLNK" (4 bytes), version u16 = 1, channel id u16, record count u64,
//   then count records of u64 timestamp in ps, non-decreasing.
inline constexpr char kStreamMagic[4] = {'P', 'L', 'N', 'K'};
inline constexpr std::uint16_t kStreamVersion = 1;

class StreamFormatError : public std::runtime_error {
 public:
  enum class Kind { kBadHeader, kTruncated, kNonMonotonic };

  StreamFormatError(Kind kind, const std::string& message, std::uint64_t record_index = 0)
      : std::runtime_error(message), kind_(kind), record_index_(record_index) {}

  Kind kind() const { return kind_; }
  // First offending record for kNonMonotonic / kTruncated.
  std::uint64_t record_index() const { return record_index_; }

 private:
  Kind kind_;
  std::uint64_t record_index_;
};

// The file format carries no duration field; loaded streams take the last
// timestamp as their duration.
void write_stream(const simkit::EventStream& stream, const std::filesystem::path& path);
simkit::EventStream read_stream(const std::filesystem::path& path);

// CSV alternative: header line "# channel=<id>", then one decimal ps
// timestamp per line.
void write_stream_csv(const simkit::EventStream& stream, const std::filesystem::path& path);
simkit::EventStream read_stream_csv(const std::filesystem::path& path);

// "bin_center_ps,count" rows.
void write_histogram_csv(const CorrelationHistogram& histogram, const std::filesystem::path& path);

} // namespace plink::tsproc
