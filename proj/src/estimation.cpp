#include "qng/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <stdexcept>
#include <vector>

namespace qng {
namespace {

struct SplitStream {
  std::vector<std::int64_t> trigger;
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;
};

SplitStream split_by_channel(std::span<const TimeTagRecord> stream) {
  SplitStream s;
  std::uint64_t prev = 0;
  for (const auto& tag : stream) {
    if (tag.timestamp_ps < prev) {
      throw std::invalid_argument("time-tag stream is not sorted");
    }
    prev = tag.timestamp_ps;
    const auto t = static_cast<std::int64_t>(tag.timestamp_ps);
    switch (tag.channel) {
      case kChannelTrigger:
        s.trigger.push_back(t);
        break;
      case kChannelA:
        s.a.push_back(t);
        break;
      case kChannelB:
        s.b.push_back(t);
        break;
      default:
        throw std::invalid_argument("unknown channel in stream");
    }
  }
  return s;
}

// Window lows are nondecreasing with the trigger index, so a single forward
// pointer per signal channel suffices even with overlapping windows.
struct WindowScanner {
  const std::vector<std::int64_t>& tags;
  std::size_t i = 0;

  bool any_in(std::int64_t lo, std::int64_t hi) {
    while (i < tags.size() && tags[i] < lo) ++i;
    return i < tags.size() && tags[i] < hi;
  }
};

CoincidenceCounts count_range(const SplitStream& s, std::size_t trig_lo,
                              std::size_t trig_hi, std::int64_t offset_ps,
                              std::int64_t tau_ps) {
  CoincidenceCounts counts;
  const std::int64_t half = tau_ps / 2;
  WindowScanner scan_a{s.a};
  WindowScanner scan_b{s.b};
  if (trig_lo < trig_hi) {
    const std::int64_t first_lo = s.trigger[trig_lo] + offset_ps - half;
    scan_a.i = static_cast<std::size_t>(
        std::lower_bound(s.a.begin(), s.a.end(), first_lo) - s.a.begin());
    scan_b.i = static_cast<std::size_t>(
        std::lower_bound(s.b.begin(), s.b.end(), first_lo) - s.b.begin());
  }
  for (std::size_t k = trig_lo; k < trig_hi; ++k) {
    const std::int64_t lo = s.trigger[k] + offset_ps - half;
    const std::int64_t hi = lo + tau_ps;
    const bool a = scan_a.any_in(lo, hi);
    const bool b = scan_b.any_in(lo, hi);
    ++counts.n_trigger;
    if (a && b) {
      ++counts.n_both;
    } else if (a) {
      ++counts.n_a_only;
    } else if (b) {
      ++counts.n_b_only;
    } else {
      ++counts.n_none;
    }
  }
  return counts;
}

}  // namespace

CoincidenceCounts count_coincidences(std::span<const TimeTagRecord> stream,
                                     double tau_s, double offset_s,
                                     int num_threads) {
  if (!(tau_s > 0.0)) throw std::domain_error("tau must be positive");
  if (num_threads < 1) throw std::domain_error("num_threads must be >= 1");
  const auto tau_ps = static_cast<std::int64_t>(std::llround(tau_s * 1e12));
  const auto offset_ps =
      static_cast<std::int64_t>(std::llround(offset_s * 1e12));
  if (tau_ps < 1) throw std::domain_error("tau is below 1 ps resolution");

  const SplitStream s = split_by_channel(stream);
  const std::size_t n = s.trigger.size();

  CoincidenceCounts total;
  total.tau_s = tau_s;
  if (n == 0) return total;

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(num_threads), n);
  if (workers == 1) {
    auto counts = count_range(s, 0, n, offset_ps, tau_ps);
    counts.tau_s = tau_s;
    return counts;
  }
  std::vector<std::future<CoincidenceCounts>> parts;
  parts.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    parts.push_back(std::async(std::launch::async, [&, lo, hi] {
      return count_range(s, lo, hi, offset_ps, tau_ps);
    }));
  }
  for (auto& part : parts) {
    const auto c = part.get();
    total.n_trigger += c.n_trigger;
    total.n_none += c.n_none;
    total.n_a_only += c.n_a_only;
    total.n_b_only += c.n_b_only;
    total.n_both += c.n_both;
  }
  return total;
}

double find_window_offset(std::span<const TimeTagRecord> stream) {
  constexpr std::int64_t kRangePs = 500'000;  // +/-500 ns
  constexpr std::int64_t kBinPs = 1'000;
  const SplitStream s = split_by_channel(stream);

  std::vector<std::int64_t> signal;
  signal.reserve(s.a.size() + s.b.size());
  std::merge(s.a.begin(), s.a.end(), s.b.begin(), s.b.end(),
             std::back_inserter(signal));

  std::array<std::uint64_t, 2 * kRangePs / kBinPs> hist{};
  std::size_t lo = 0;
  for (const std::int64_t t : signal) {
    while (lo < s.trigger.size() && s.trigger[lo] < t - kRangePs) ++lo;
    for (std::size_t i = lo; i < s.trigger.size() && s.trigger[i] <= t + kRangePs;
         ++i) {
      const std::int64_t dt = t - s.trigger[i];
      const auto bin = static_cast<std::size_t>((dt + kRangePs) / kBinPs);
      if (bin < hist.size()) ++hist[bin];
    }
  }
  const auto mode = std::max_element(hist.begin(), hist.end());
  if (mode == hist.end() || *mode == 0) return 0.0;
  const auto bin = static_cast<std::int64_t>(mode - hist.begin());
  const std::int64_t center_ps = bin * kBinPs + kBinPs / 2 - kRangePs;
  return static_cast<double>(center_ps) * 1e-12;
}

ClickProbabilities estimate(const CoincidenceCounts& counts) {
  if (counts.n_trigger == 0) {
    throw std::domain_error("cannot estimate probabilities from zero triggers");
  }
  if (counts.n_none + counts.n_a_only + counts.n_b_only + counts.n_both !=
      counts.n_trigger) {
    throw std::invalid_argument("inconsistent coincidence counts");
  }
  const double n = static_cast<double>(counts.n_trigger);
  const auto sigma = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
  ClickProbabilities p;
  p.p0 = static_cast<double>(counts.n_none) / n;
  p.p1 = static_cast<double>(counts.n_a_only + counts.n_b_only) / n;
  p.p2plus = static_cast<double>(counts.n_both) / n;
  p.sigma_p0 = sigma(p.p0);
  p.sigma_p1 = sigma(p.p1);
  p.sigma_p2plus = sigma(p.p2plus);
  return p;
}

InvertedPhotonProbs invert_click_statistics(const ClickProbabilities& p) {
  if (p.p2plus > p.p1) {
    throw std::domain_error(
        "click inversion: p2plus exceeds p1, support {0,1,2} untenable");
  }
  InvertedPhotonProbs out;
  out.p0 = p.p0;
  out.p1 = p.p1 - p.p2plus;
  out.p2 = 2.0 * p.p2plus;
  if (out.p0 < 0.0 || out.p1 < 0.0 || out.p2 < 0.0) {
    throw std::domain_error("click inversion produced a negative probability");
  }
  return out;
}

}  // namespace qng
