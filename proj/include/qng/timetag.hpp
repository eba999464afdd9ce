#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qng/sources.hpp"

namespace qng {

inline constexpr std::uint8_t kChannelTrigger = 0;
inline constexpr std::uint8_t kChannelA = 1;
inline constexpr std::uint8_t kChannelB = 2;

/// One detection event. Streams are sorted by timestamp, ties broken by
/// channel; timestamps are unique per channel.
struct TimeTagRecord {
  std::uint64_t timestamp_ps = 0;
  std::uint8_t channel = 0;

  friend bool operator==(const TimeTagRecord&, const TimeTagRecord&) = default;
};

struct DetectorConfig {
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;
  double jitter_sigma_s = 0.0;
};

struct RunConfig {
  SourceConfig source = IdealSourceConfig{};
  Transmittance attenuator{1.0};
  DetectorConfig trigger;
  DetectorConfig detector_a;
  DetectorConfig detector_b;
  std::uint64_t pulse_count = 0;    // pulsed sources
  double duration_s = 0.0;          // cw source
  double repetition_rate_hz = 0.0;  // pulse clock for ideal and quantum-dot
                                    // sources (pulsed SPDC carries its own)
  std::uint64_t seed = 0;
};

/// Deterministic, collision-resistant seed for a run segment. Merging
/// segment substreams in index order yields the same stream for any number
/// of workers.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t segment_index);

/// Monte Carlo time-tag stream for the triggered autocorrelation scheme:
/// trigger detector plus two signal detectors behind a balanced splitter,
/// with a variable attenuator in the signal arm. Signal photons are thinned
/// by the source coupling, the attenuator and the detector efficiency,
/// routed A/B with probability 1/2 each, and jittered per detector.
/// Independent Poisson dark counts overlay all three channels. Output is
/// sorted by (timestamp, channel) with per-channel duplicate timestamps
/// nudged forward by 1 ps.
///
/// The result depends on the seed and the fixed internal segment partition
/// only, never on num_threads.
std::vector<TimeTagRecord> simulate(const RunConfig& cfg, int num_threads = 1);

/// Ground-truth per-pulse window bookkeeping collected during generation.
/// Meaningful for pulsed, jitter-free, dark-free runs, where every detection
/// falls in its own pulse window.
struct TruthCounts {
  std::uint64_t n_trigger = 0;
  std::uint64_t n_none = 0;
  std::uint64_t n_a_only = 0;
  std::uint64_t n_b_only = 0;
  std::uint64_t n_both = 0;
};

struct SimulationWithTruth {
  std::vector<TimeTagRecord> tags;
  TruthCounts truth;
};

SimulationWithTruth simulate_with_truth(const RunConfig& cfg,
                                        int num_threads = 1);

/// Total simulated span in integer picoseconds for the given run.
std::uint64_t run_duration_ps(const RunConfig& cfg);

// Binary time-tag file: 16-byte header (magic "QTT1", u32 version,
// 8 reserved bytes), then little-endian (u8 channel, u64 picoseconds)
// records.
void write_tags_binary(const std::filesystem::path& path,
                       std::span<const TimeTagRecord> tags);
std::vector<TimeTagRecord> read_tags_binary(const std::filesystem::path& path);

// CSV alternative: header row "channel,timestamp_ps".
void write_tags_csv(const std::filesystem::path& path,
                    std::span<const TimeTagRecord> tags);
std::vector<TimeTagRecord> read_tags_csv(const std::filesystem::path& path);

}  // namespace qng
