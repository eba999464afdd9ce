#include "qng/timetag.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <random>
#include <stdexcept>
#include <string>

namespace qng {
namespace {

constexpr std::uint64_t kPulsesPerSegment = 1ull << 20;
constexpr double kCwSliceSeconds = 0.25;
constexpr int kMaxPairsPerPulse = 512;
constexpr char kMagic[4] = {'Q', 'T', 'T', '1'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void validate_detector(const DetectorConfig& d, const char* name) {
  if (!(d.efficiency >= 0.0 && d.efficiency <= 1.0)) {
    throw std::domain_error(std::string(name) + " efficiency must lie in [0, 1]");
  }
  if (!(d.dark_rate_hz >= 0.0)) {
    throw std::domain_error(std::string(name) + " dark rate must be >= 0");
  }
  if (!(d.jitter_sigma_s >= 0.0)) {
    throw std::domain_error(std::string(name) + " jitter sigma must be >= 0");
  }
}

bool is_pulsed(const SourceConfig& source) {
  if (const auto* spdc = std::get_if<SpdcConfig>(&source)) {
    return spdc->regime == SpdcRegime::kPulsed;
  }
  return true;  // ideal and quantum-dot sources are pulse-clocked here
}

double pulse_rate_hz(const RunConfig& cfg) {
  if (const auto* spdc = std::get_if<SpdcConfig>(&cfg.source)) {
    return spdc->repetition_rate_hz;
  }
  return cfg.repetition_rate_hz;
}

void validate_run(const RunConfig& cfg) {
  validate_detector(cfg.trigger, "trigger");
  validate_detector(cfg.detector_a, "detector A");
  validate_detector(cfg.detector_b, "detector B");
  source_state(cfg.source);  // full source validation
  if (is_pulsed(cfg.source)) {
    if (cfg.pulse_count == 0) {
      throw std::domain_error("pulsed run requires pulse_count > 0");
    }
    if (!(pulse_rate_hz(cfg) > 0.0)) {
      throw std::domain_error("pulsed run requires a repetition rate");
    }
  } else {
    if (!(cfg.duration_s > 0.0)) {
      throw std::domain_error("cw run requires duration_s > 0");
    }
    const auto& spdc = std::get<SpdcConfig>(cfg.source);
    if (!(spdc.eta_signal > 0.0)) {
      throw std::domain_error("cw simulation requires eta_signal > 0");
    }
  }
}

// Per-segment generation state. Draw order inside a segment is fixed, so the
// substream depends only on the segment seed.
struct SegmentContext {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> unif{0.0, 1.0};
  std::normal_distribution<double> normal{0.0, 1.0};
  std::array<double, 3> jitter_ps{};
  std::array<double, 3> efficiency{};
  std::array<double, 3> dark_rate_hz{};
  double attenuator_t = 1.0;
  std::uint64_t duration_ps = 0;
  std::vector<TimeTagRecord>* out = nullptr;
  TruthCounts truth;

  void emit(std::uint8_t channel, double t_ps) {
    if (jitter_ps[channel] > 0.0) t_ps += jitter_ps[channel] * normal(rng);
    if (t_ps < 0.0) t_ps = 0.0;
    const auto t = static_cast<std::uint64_t>(std::llround(t_ps));
    if (t >= duration_ps) return;
    out->push_back({t, channel});
  }

  // A photon at the splitter input: route, then detector efficiency.
  void route_signal_photon(double t_ps, bool* a_click, bool* b_click) {
    const std::uint8_t ch = unif(rng) < 0.5 ? kChannelA : kChannelB;
    if (unif(rng) < efficiency[ch]) {
      emit(ch, t_ps);
      (ch == kChannelA ? *a_click : *b_click) = true;
    }
  }

  void record_pulse_truth(bool trig, bool a, bool b) {
    if (!trig) return;
    ++truth.n_trigger;
    if (a && b) {
      ++truth.n_both;
    } else if (a) {
      ++truth.n_a_only;
    } else if (b) {
      ++truth.n_b_only;
    } else {
      ++truth.n_none;
    }
  }

  void generate_darks(std::uint64_t begin_ps, std::uint64_t end_ps) {
    const double span_s = static_cast<double>(end_ps - begin_ps) * 1e-12;
    for (std::uint8_t ch = 0; ch < 3; ++ch) {
      if (dark_rate_hz[ch] <= 0.0) continue;
      std::poisson_distribution<std::uint64_t> count(dark_rate_hz[ch] * span_s);
      const std::uint64_t k = count(rng);
      for (std::uint64_t j = 0; j < k; ++j) {
        const double t =
            static_cast<double>(begin_ps) +
            unif(rng) * static_cast<double>(end_ps - begin_ps);
        const auto tp = static_cast<std::uint64_t>(t);
        if (tp < duration_ps) out->push_back({tp, ch});
      }
    }
  }
};

struct PulsedParams {
  enum Kind { kIdeal, kSpdc, kQuantumDot } kind = kIdeal;
  double trigger_click_prob = 0.0;  // arm coupling times detector efficiency
  double gain = 0.0;
  double inv_log_gain = 0.0;
  double signal_reach_prob = 0.0;  // coupling times attenuator
  double mean_background = 0.0;    // quantum dot, per pulse, before attenuator
};

PulsedParams make_pulsed_params(const RunConfig& cfg) {
  PulsedParams p;
  const double t = cfg.attenuator.value();
  if (const auto* ideal = std::get_if<IdealSourceConfig>(&cfg.source)) {
    p.kind = PulsedParams::kIdeal;
    p.trigger_click_prob = cfg.trigger.efficiency;
    p.signal_reach_prob = ideal->eta * t;
  } else if (const auto* spdc = std::get_if<SpdcConfig>(&cfg.source)) {
    p.kind = PulsedParams::kSpdc;
    p.trigger_click_prob = spdc->eta_trigger * cfg.trigger.efficiency;
    p.gain = spdc->gain;
    p.inv_log_gain = spdc->gain > 0.0 ? 1.0 / std::log(spdc->gain) : 0.0;
    p.signal_reach_prob = spdc->eta_signal * t;
  } else {
    const auto& qd = std::get<QuantumDotConfig>(cfg.source);
    p.kind = PulsedParams::kQuantumDot;
    p.trigger_click_prob = cfg.trigger.efficiency;
    p.signal_reach_prob = qd.eta_collection * t;
    p.mean_background = qd.mean_background;
  }
  return p;
}

void run_pulsed_segment(const PulsedParams& p, std::uint64_t pulse_lo,
                        std::uint64_t pulse_hi, double period_ps,
                        double attenuator_t, SegmentContext& c) {
  std::poisson_distribution<int> background(
      p.mean_background > 0.0 ? p.mean_background : 1.0);
  for (std::uint64_t i = pulse_lo; i < pulse_hi; ++i) {
    const double t0 = static_cast<double>(i + 1) * period_ps;
    bool trig = false;
    bool a = false;
    bool b = false;
    switch (p.kind) {
      case PulsedParams::kSpdc: {
        const double u = c.unif(c.rng);
        int pairs = 0;
        if (u < p.gain) {
          pairs = u > 0.0 ? std::min<int>(kMaxPairsPerPulse,
                                          static_cast<int>(std::log(u) *
                                                           p.inv_log_gain))
                          : kMaxPairsPerPulse;
        }
        for (int j = 0; j < pairs && !trig; ++j) {
          trig = c.unif(c.rng) < p.trigger_click_prob;
        }
        if (trig) c.emit(kChannelTrigger, t0);
        for (int j = 0; j < pairs; ++j) {
          if (c.unif(c.rng) < p.signal_reach_prob) {
            c.route_signal_photon(t0, &a, &b);
          }
        }
        break;
      }
      case PulsedParams::kIdeal: {
        trig = c.unif(c.rng) < p.trigger_click_prob;
        if (trig) c.emit(kChannelTrigger, t0);
        if (c.unif(c.rng) < p.signal_reach_prob) {
          c.route_signal_photon(t0, &a, &b);
        }
        break;
      }
      case PulsedParams::kQuantumDot: {
        trig = c.unif(c.rng) < p.trigger_click_prob;
        if (trig) c.emit(kChannelTrigger, t0);
        if (c.unif(c.rng) < p.signal_reach_prob) {
          c.route_signal_photon(t0, &a, &b);
        }
        if (p.mean_background > 0.0) {
          const int k = background(c.rng);
          for (int j = 0; j < k; ++j) {
            if (c.unif(c.rng) < attenuator_t) {
              c.route_signal_photon(t0, &a, &b);
            }
          }
        }
        break;
      }
    }
    c.record_pulse_truth(trig, a, b);
  }
}

// Every generated pair sends its twin into the signal arm, so the accidental
// flux seen by any coincidence window is exactly the configured background
// rate; a separate background stream would double-count the heralded twins.
void run_cw_segment(const SpdcConfig& spdc, double trigger_efficiency,
                    double begin_s, double end_s, SegmentContext& c) {
  const double pair_rate = spdc.background_rate_hz / spdc.eta_signal;
  const double trig_prob = spdc.eta_trigger * trigger_efficiency;
  if (pair_rate > 0.0) {
    std::exponential_distribution<double> gap(pair_rate);
    double t = begin_s;
    for (;;) {
      t += gap(c.rng);
      if (t >= end_s) break;
      const double t_ps = t * 1e12;
      if (c.unif(c.rng) < trig_prob) c.emit(kChannelTrigger, t_ps);
      if (c.unif(c.rng) < spdc.eta_signal &&
          c.unif(c.rng) < c.attenuator_t) {
        bool a = false;
        bool b = false;
        c.route_signal_photon(t_ps, &a, &b);
      }
    }
  }
}

std::vector<TimeTagRecord> finalize_stream(
    std::vector<std::vector<TimeTagRecord>> segments) {
  std::size_t total = 0;
  for (const auto& s : segments) total += s.size();
  std::vector<TimeTagRecord> tags;
  tags.reserve(total);
  for (auto& s : segments) {
    tags.insert(tags.end(), s.begin(), s.end());
    s.clear();
    s.shrink_to_fit();
  }
  const auto by_time_then_channel = [](const TimeTagRecord& x,
                                       const TimeTagRecord& y) {
    return x.timestamp_ps != y.timestamp_ps ? x.timestamp_ps < y.timestamp_ps
                                            : x.channel < y.channel;
  };
  std::sort(tags.begin(), tags.end(), by_time_then_channel);
  // Per-channel duplicate timestamps get a +1 ps nudge; one pass leaves each
  // channel strictly increasing, then the global order is restored.
  std::array<std::int64_t, 3> last{-1, -1, -1};
  bool nudged = false;
  for (auto& tag : tags) {
    auto t = static_cast<std::int64_t>(tag.timestamp_ps);
    if (t <= last[tag.channel]) {
      t = last[tag.channel] + 1;
      tag.timestamp_ps = static_cast<std::uint64_t>(t);
      nudged = true;
    }
    last[tag.channel] = t;
  }
  if (nudged) std::sort(tags.begin(), tags.end(), by_time_then_channel);
  return tags;
}

std::vector<TimeTagRecord> simulate_impl(const RunConfig& cfg, int num_threads,
                                         TruthCounts* truth_out) {
  validate_run(cfg);
  if (num_threads < 1) throw std::domain_error("num_threads must be >= 1");

  const bool pulsed = is_pulsed(cfg.source);
  const std::uint64_t duration_ps = run_duration_ps(cfg);
  const double period_ps = pulsed ? 1e12 / pulse_rate_hz(cfg) : 0.0;

  std::uint64_t num_segments;
  if (pulsed) {
    num_segments = (cfg.pulse_count + kPulsesPerSegment - 1) / kPulsesPerSegment;
  } else {
    num_segments = static_cast<std::uint64_t>(
        std::ceil(cfg.duration_s / kCwSliceSeconds));
  }
  num_segments = std::max<std::uint64_t>(num_segments, 1);

  const PulsedParams pulsed_params =
      pulsed ? make_pulsed_params(cfg) : PulsedParams{};

  std::vector<std::vector<TimeTagRecord>> segments(num_segments);
  std::vector<TruthCounts> truths(num_segments);

  const auto run_segment = [&](std::uint64_t k) {
    SegmentContext c;
    c.rng.seed(split_seed(cfg.seed, k));
    c.jitter_ps = {cfg.trigger.jitter_sigma_s * 1e12,
                   cfg.detector_a.jitter_sigma_s * 1e12,
                   cfg.detector_b.jitter_sigma_s * 1e12};
    c.efficiency = {cfg.trigger.efficiency, cfg.detector_a.efficiency,
                    cfg.detector_b.efficiency};
    c.dark_rate_hz = {cfg.trigger.dark_rate_hz, cfg.detector_a.dark_rate_hz,
                      cfg.detector_b.dark_rate_hz};
    c.attenuator_t = cfg.attenuator.value();
    c.duration_ps = duration_ps;
    c.out = &segments[k];

    std::uint64_t dark_begin_ps, dark_end_ps;
    if (pulsed) {
      const std::uint64_t lo = k * kPulsesPerSegment;
      const std::uint64_t hi =
          std::min(cfg.pulse_count, lo + kPulsesPerSegment);
      run_pulsed_segment(pulsed_params, lo, hi, period_ps,
                         cfg.attenuator.value(), c);
      dark_begin_ps = static_cast<std::uint64_t>(
          std::llround(static_cast<double>(lo) * period_ps));
      dark_end_ps = (k + 1 == num_segments)
                        ? duration_ps
                        : static_cast<std::uint64_t>(std::llround(
                              static_cast<double>(hi) * period_ps));
    } else {
      const double begin_s = static_cast<double>(k) * kCwSliceSeconds;
      const double end_s =
          std::min(cfg.duration_s, begin_s + kCwSliceSeconds);
      run_cw_segment(std::get<SpdcConfig>(cfg.source),
                     cfg.trigger.efficiency, begin_s, end_s, c);
      dark_begin_ps =
          static_cast<std::uint64_t>(std::llround(begin_s * 1e12));
      dark_end_ps = (k + 1 == num_segments)
                        ? duration_ps
                        : static_cast<std::uint64_t>(
                              std::llround(end_s * 1e12));
    }
    c.generate_darks(dark_begin_ps, dark_end_ps);
    truths[k] = c.truth;
  };

  if (num_threads == 1 || num_segments == 1) {
    for (std::uint64_t k = 0; k < num_segments; ++k) run_segment(k);
  } else {
    std::atomic<std::uint64_t> next{0};
    const auto worker = [&] {
      for (;;) {
        const std::uint64_t k = next.fetch_add(1);
        if (k >= num_segments) return;
        run_segment(k);
      }
    };
    std::vector<std::future<void>> pool;
    const int n = std::min<std::uint64_t>(num_threads, num_segments);
    pool.reserve(n);
    for (int w = 0; w < n; ++w) {
      pool.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : pool) f.get();
  }

  if (truth_out) {
    TruthCounts total;
    for (const auto& t : truths) {
      total.n_trigger += t.n_trigger;
      total.n_none += t.n_none;
      total.n_a_only += t.n_a_only;
      total.n_b_only += t.n_b_only;
      total.n_both += t.n_both;
    }
    *truth_out = total;
  }
  return finalize_stream(std::move(segments));
}

void append_u64_le(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
}

std::uint64_t read_u64_le(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t segment_index) {
  return splitmix64(splitmix64(seed) +
                    0x9E3779B97F4A7C15ull * (segment_index + 1));
}

std::uint64_t run_duration_ps(const RunConfig& cfg) {
  if (is_pulsed(cfg.source)) {
    const double period_ps = 1e12 / pulse_rate_hz(cfg);
    return static_cast<std::uint64_t>(
        std::llround(static_cast<double>(cfg.pulse_count + 1) * period_ps));
  }
  return static_cast<std::uint64_t>(std::llround(cfg.duration_s * 1e12));
}

std::vector<TimeTagRecord> simulate(const RunConfig& cfg, int num_threads) {
  return simulate_impl(cfg, num_threads, nullptr);
}

SimulationWithTruth simulate_with_truth(const RunConfig& cfg,
                                        int num_threads) {
  if (!is_pulsed(cfg.source)) {
    throw std::invalid_argument(
        "per-pulse truth bookkeeping needs a pulsed source");
  }
  SimulationWithTruth r;
  r.tags = simulate_impl(cfg, num_threads, &r.truth);
  return r;
}

void write_tags_binary(const std::filesystem::path& path,
                       std::span<const TimeTagRecord> tags) {
  std::string buf;
  buf.reserve(16 + tags.size() * 9);
  buf.append(kMagic, 4);
  const std::uint32_t version = kFormatVersion;
  for (int i = 0; i < 4; ++i) {
    buf.push_back(static_cast<char>(version >> (8 * i)));
  }
  buf.append(8, '\0');
  for (const auto& tag : tags) {
    buf.push_back(static_cast<char>(tag.channel));
    append_u64_le(buf, tag.timestamp_ps);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<TimeTagRecord> read_tags_binary(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 16 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw std::runtime_error(path.string() + ": not a QTT1 time-tag file");
  }
  std::uint32_t version = 0;
  for (int i = 0; i < 4; ++i) {
    version |= static_cast<std::uint32_t>(
                   static_cast<unsigned char>(buf[4 + i]))
               << (8 * i);
  }
  if (version != kFormatVersion) {
    throw std::runtime_error(path.string() + ": unsupported version " +
                             std::to_string(version));
  }
  const std::size_t body = buf.size() - 16;
  if (body % 9 != 0) {
    throw std::runtime_error(path.string() + ": truncated record data");
  }
  std::vector<TimeTagRecord> tags(body / 9);
  const char* p = buf.data() + 16;
  for (auto& tag : tags) {
    tag.channel = static_cast<std::uint8_t>(*p++);
    tag.timestamp_ps = read_u64_le(p);
    p += 8;
  }
  return tags;
}

void write_tags_csv(const std::filesystem::path& path,
                    std::span<const TimeTagRecord> tags) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "channel,timestamp_ps\n";
  for (const auto& tag : tags) {
    out << static_cast<unsigned>(tag.channel) << ',' << tag.timestamp_ps
        << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<TimeTagRecord> read_tags_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "channel,timestamp_ps") {
    throw std::runtime_error(path.string() + ": missing CSV header");
  }
  std::vector<TimeTagRecord> tags;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(path.string() + ": malformed CSV row");
    }
    unsigned channel = 0;
    std::uint64_t t = 0;
    const auto r1 =
        std::from_chars(line.data(), line.data() + comma, channel);
    const auto r2 = std::from_chars(line.data() + comma + 1,
                                    line.data() + line.size(), t);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || channel > 2) {
      throw std::runtime_error(path.string() + ": malformed CSV row");
    }
    tags.push_back({t, static_cast<std::uint8_t>(channel)});
  }
  return tags;
}

}  // namespace qng
