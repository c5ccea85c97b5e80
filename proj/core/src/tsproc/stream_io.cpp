#include "plink/tsproc/stream_io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace plink::tsproc {

namespace {

void put_u16le(std::ofstream& f, std::uint16_t v) {
  const std::array<char, 2> b = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  f.write(b.data(), b.size());
}

void put_u64le(std::ofstream& f, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>(v >> (8 * i));
  f.write(b.data(), b.size());
}

std::uint16_t get_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

} // namespace

void write_stream(const simkit::EventStream& stream, const std::filesystem::path& path) {
  stream.check_invariants();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(kStreamMagic, 4);
  put_u16le(f, kStreamVersion);
  put_u16le(f, stream.channel_id);
  put_u64le(f, stream.size());
  std::vector<char> buffer;
  buffer.reserve(stream.size() * 8);
  for (TimePs t : stream.times) {
    const std::uint64_t v = static_cast<std::uint64_t>(t);
    for (int i = 0; i < 8; ++i) buffer.push_back(static_cast<char>(v >> (8 * i)));
  }
  f.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

simkit::EventStream read_stream(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());

  std::array<unsigned char, 16> header;
  f.read(reinterpret_cast<char*>(header.data()), header.size());
  if (f.gcount() != static_cast<std::streamsize>(header.size()))
    throw StreamFormatError(StreamFormatError::Kind::kBadHeader,
                            path.string() + ": file too short for a stream header");
  if (std::memcmp(header.data(), kStreamMagic, 4) != 0)
    throw StreamFormatError(StreamFormatError::Kind::kBadHeader,
                            path.string() + ": bad magic, not a timestamp stream");
  const std::uint16_t version = get_u16le(header.data() + 4);
  if (version != kStreamVersion)
    throw StreamFormatError(StreamFormatError::Kind::kBadHeader,
                            path.string() + ": unsupported version " + std::to_string(version));

  simkit::EventStream out;
  out.channel_id = get_u16le(header.data() + 6);
  const std::uint64_t count = get_u64le(header.data() + 8);
  out.times.reserve(count);

  std::vector<unsigned char> buffer(8 * 4096);
  std::uint64_t read_records = 0;
  TimePs previous = 0;
  while (read_records < count) {
    const std::uint64_t want =
        std::min<std::uint64_t>(count - read_records, buffer.size() / 8);
    f.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(want * 8));
    const std::uint64_t got_bytes = static_cast<std::uint64_t>(f.gcount());
    if (got_bytes < want * 8)
      throw StreamFormatError(
          StreamFormatError::Kind::kTruncated,
          path.string() + ": truncated at record " +
              std::to_string(read_records + got_bytes / 8) + " of " + std::to_string(count),
          read_records + got_bytes / 8);
    for (std::uint64_t k = 0; k < want; ++k) {
      const TimePs t = static_cast<TimePs>(get_u64le(buffer.data() + 8 * k));
      if (read_records + k > 0 && t < previous)
        throw StreamFormatError(StreamFormatError::Kind::kNonMonotonic,
                                path.string() + ": non-monotonic timestamp at record " +
                                    std::to_string(read_records + k),
                                read_records + k);
      out.times.push_back(t);
      previous = t;
    }
    read_records += want;
  }
  out.duration_ps = out.times.empty() ? 0 : out.times.back();
  return out;
}

void write_stream_csv(const simkit::EventStream& stream, const std::filesystem::path& path) {
  stream.check_invariants();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << "# channel=" << stream.channel_id << "\n";
  for (TimePs t : stream.times) f << t << "\n";
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

simkit::EventStream read_stream_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line.rfind("# channel=", 0) != 0)
    throw StreamFormatError(StreamFormatError::Kind::kBadHeader,
                            path.string() + ": missing '# channel=<id>' header line");
  simkit::EventStream out;
  out.channel_id = static_cast<std::uint16_t>(std::stoul(line.substr(10)));
  std::uint64_t index = 0;
  TimePs previous = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    TimePs t = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), t);
    if (ec != std::errc{} || ptr != line.data() + line.size())
      throw StreamFormatError(StreamFormatError::Kind::kTruncated,
                              path.string() + ": malformed record " + std::to_string(index),
                              index);
    if (index > 0 && t < previous)
      throw StreamFormatError(StreamFormatError::Kind::kNonMonotonic,
                              path.string() + ": non-monotonic timestamp at record " +
                                  std::to_string(index),
                              index);
    out.times.push_back(t);
    previous = t;
    ++index;
  }
  out.duration_ps = out.times.empty() ? 0 : out.times.back();
  return out;
}

void write_histogram_csv(const CorrelationHistogram& histogram,
                         const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << "bin_center_ps,count\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i)
    f << histogram.bin_center_ps(i) << "," << histogram.counts[i] << "\n";
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

} // namespace plink::tsproc
