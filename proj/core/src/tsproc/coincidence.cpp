#include "plink/tsproc/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plink::tsproc {

namespace {

TimePs half_window_ps(double window_ns) {
  if (window_ns <= 0.0) throw std::invalid_argument("window must be > 0");
  return static_cast<TimePs>(std::llround(window_ns * 500.0));
}

void require_sorted(const EventStream& s, const char* which) {
  if (!s.is_sorted())
    throw std::invalid_argument(std::string("stream ") + which + " is not sorted");
}

double overlap_duration_s(const EventStream& a, const EventStream& b) {
  const TimePs d = std::max(a.duration_ps, b.duration_ps);
  return d > 0 ? ps_to_seconds(d) : 0.0;
}

// Histogram accumulation capped so a careless span/bin combination cannot
// exhaust memory.
constexpr std::int64_t kMaxHistogramBins = 60'000'000;

} // namespace

CoincidenceResult find_coincidences(const EventStream& a, const EventStream& b,
                                    double window_ns, TimePs offset_ps, bool collect_matches) {
  require_sorted(a, "a");
  require_sorted(b, "b");
  const TimePs half = half_window_ps(window_ns);

  CoincidenceResult out;
  out.window_ns = window_ns;
  out.applied_offset_ps = offset_ps;

  // Greedy earliest-first one-to-one matching: walk a in time order and take
  // the earliest unconsumed b inside [t_a + offset - half, t_a + offset + half].
  // b events skipped as too early can never match a later a.
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TimePs lo = a.times[i] + offset_ps - half;
    const TimePs hi = lo + 2 * half;
    while (j < b.size() && b.times[j] < lo) ++j;
    if (j == b.size()) break;
    if (b.times[j] <= hi) {
      ++out.count;
      if (collect_matches)
        out.matches.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      ++j;
    }
  }

  const double duration = overlap_duration_s(a, b);
  out.rate_hz = duration > 0 ? static_cast<double>(out.count) / duration : 0.0;
  return out;
}

CorrelationHistogram correlation_histogram(const EventStream& a, const EventStream& b,
                                           std::int64_t bin_width_ps, TimePs min_dt_ps,
                                           TimePs max_dt_ps, TimePs offset_ps) {
  require_sorted(a, "a");
  require_sorted(b, "b");
  if (bin_width_ps <= 0) throw std::invalid_argument("bin width must be > 0");
  if (max_dt_ps <= min_dt_ps) throw std::invalid_argument("range must span at least one bin");

  const std::int64_t nbins =
      (max_dt_ps - min_dt_ps + bin_width_ps - 1) / bin_width_ps; // ceil
  if (nbins > kMaxHistogramBins)
    throw std::invalid_argument("histogram would require too many bins");

  CorrelationHistogram h;
  h.bin_width_ps = bin_width_ps;
  h.min_dt_ps = min_dt_ps;
  h.counts.assign(static_cast<std::size_t>(nbins), 0);

  // sliding window: for each a event, b events with
  // t_b - t_a - offset in [min_dt, min_dt + nbins*bin)
  const TimePs upper = min_dt_ps + nbins * bin_width_ps;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TimePs base = a.times[i] + offset_ps;
    while (lo < b.size() && b.times[lo] - base < min_dt_ps) ++lo;
    for (std::size_t j = lo; j < b.size(); ++j) {
      const TimePs d = b.times[j] - base;
      if (d >= upper) break;
      ++h.counts[static_cast<std::size_t>((d - min_dt_ps) / bin_width_ps)];
      ++h.total;
    }
  }
  return h;
}

namespace {

struct PeakStats {
  std::size_t bin = 0;
  std::uint64_t count = 0;
  double background = 0.0; // median bin content
  double centroid_ps = 0.0;
  double fwhm_ps = 0.0;
};

PeakStats analyze_peak(const CorrelationHistogram& h) {
  PeakStats p;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] > p.count) {
      p.count = h.counts[i];
      p.bin = i;
    }
  }
  if (p.count == 0) return p;

  std::vector<std::uint64_t> sorted(h.counts);
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  p.background = static_cast<double>(sorted[sorted.size() / 2]);

  // contiguous region above half maximum (over background)
  const double half = p.background + (static_cast<double>(p.count) - p.background) / 2.0;
  std::size_t lo = p.bin, hi = p.bin;
  while (lo > 0 && static_cast<double>(h.counts[lo - 1]) > half) --lo;
  while (hi + 1 < h.counts.size() && static_cast<double>(h.counts[hi + 1]) > half) ++hi;
  p.fwhm_ps = static_cast<double>(hi - lo + 1) * static_cast<double>(h.bin_width_ps);

  double mass = 0.0, first_moment = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double y = static_cast<double>(h.counts[i]) - p.background;
    if (y <= 0.0) continue;
    mass += y;
    first_moment += y * h.bin_center_ps(i);
  }
  p.centroid_ps = mass > 0.0 ? first_moment / mass : h.bin_center_ps(p.bin);
  return p;
}

} // namespace

OffsetScan find_offset(const EventStream& a, const EventStream& b, double search_span_s,
                       double coarse_bin_ns) {
  if (search_span_s <= 0.0) throw std::invalid_argument("search span must be > 0");
  if (coarse_bin_ns <= 0.0) throw std::invalid_argument("coarse bin must be > 0");

  OffsetScan out;
  if (a.empty() || b.empty()) return out;

  TimePs bin = static_cast<TimePs>(std::llround(coarse_bin_ns * kPsPerNs));
  const TimePs span = static_cast<TimePs>(std::llround(search_span_s * kPsPerSecond));
  TimePs center = 0;
  TimePs lo = -span;
  TimePs hi = span;

  // Refine the bin width down to <= 10 ps, re-centering on the peak centroid
  // each pass and keeping the range wide enough that the surrounding bins
  // sample the accidental floor. The peak/background ratio is taken from the
  // pass where it separates best (once the bin width drops below the peak
  // width, the peak spreads and its own wings would masquerade as
  // background); a Poisson guard keeps near-empty floors from promoting a
  // stray count.
  bool significant = false;
  for (;;) {
    const auto h = correlation_histogram(a, b, bin, lo, hi, center);
    const auto peak = analyze_peak(h);
    if (peak.count == 0) return out;
    center += static_cast<TimePs>(std::llround(peak.centroid_ps));
    out.final_bin_ps = bin;

    const double ratio = static_cast<double>(peak.count) / std::max(1.0, peak.background);
    const double excess = static_cast<double>(peak.count) - peak.background;
    if (ratio > out.significance) {
      out.significance = ratio;
      significant = ratio >= kOffsetSignificanceThreshold &&
                    excess > 5.0 * std::sqrt(peak.background + 1.0);
    }

    if (bin <= 10) break;
    const TimePs reach = std::max<TimePs>(
        8 * bin, 2 * static_cast<TimePs>(std::llround(peak.fwhm_ps)));
    lo = -reach;
    hi = reach;
    bin = std::max<TimePs>(bin / 16, 10);
  }
  out.offset_ps = center;
  out.found = significant;
  return out;
}

double displaced_window_rate(const EventStream& a, const EventStream& b, double window_ns,
                             TimePs offset_ps, double displacement_ns) {
  if (std::abs(displacement_ns) <= window_ns)
    throw std::invalid_argument(
        "displaced window overlaps the coincidence window; |displacement| must exceed the window");
  const TimePs displacement = static_cast<TimePs>(std::llround(displacement_ns * kPsPerNs));
  return find_coincidences(a, b, window_ns, offset_ps + displacement).rate_hz;
}

} // namespace plink::tsproc
