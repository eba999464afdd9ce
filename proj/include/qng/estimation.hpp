#pragma once

#include <cstdint>
#include <span>

#include "qng/fock.hpp"
#include "qng/timetag.hpp"

namespace qng {

/// Per-trigger window classification totals.
/// n_none + n_a_only + n_b_only + n_both == n_trigger.
struct CoincidenceCounts {
  std::uint64_t n_trigger = 0;
  std::uint64_t n_none = 0;
  std::uint64_t n_a_only = 0;
  std::uint64_t n_b_only = 0;
  std::uint64_t n_both = 0;
  double tau_s = 0.0;
};

/// Classifies the A/B content of the window
/// [t_trigger + offset - tau/2, t_trigger + offset + tau/2) around every
/// trigger tag. Overlapping windows are each counted; there is no dead-time
/// exclusion. Single linear pass over the sorted stream; a parallel fold
/// over trigger partitions returns exactly the serial counts.
CoincidenceCounts count_coincidences(std::span<const TimeTagRecord> stream,
                                     double tau_s, double offset_s,
                                     int num_threads = 1);

/// Modal trigger-to-signal delay from a coarse cross-correlation histogram
/// (1 ns bins over +/-500 ns); the default analysis window offset.
double find_window_offset(std::span<const TimeTagRecord> stream);

/// Click probabilities p0 = n_none/N, p1 = (n_a_only + n_b_only)/N,
/// p2plus = n_both/N with binomial standard errors sqrt(p(1-p)/N). These are
/// conservative click-based estimators: a photon pair registers in p2plus
/// only when it splits, so multiphoton content is never overstated.
ClickProbabilities estimate(const CoincidenceCounts& counts);

struct InvertedPhotonProbs {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

/// De-splits click statistics under ideal detection, balanced splitting and
/// photon-number support {0, 1, 2}: P2 = 2 p2plus, P1 = p1 - p2plus,
/// P0 = p0. Throws if the support assumption is untenable (p2plus > p1) or
/// any inverted probability is negative.
InvertedPhotonProbs invert_click_statistics(const ClickProbabilities& p);

}  // namespace qng
