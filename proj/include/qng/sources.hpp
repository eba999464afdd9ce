#pragma once

#include <variant>

#include "qng/fock.hpp"

namespace qng {

/// Heralded single photon with efficiency eta: {P0 = 1-eta, P1 = eta}.
/// The benchmark state every source model degrades toward.
struct IdealSourceConfig {
  double eta = 1.0;
};

enum class SpdcRegime { kPulsed, kCw };

/// Statistics of the accidental background within a coincidence window.
/// Poissonian is the many-temporal-mode limit typical of cw operation;
/// thermal is the single-mode case, with twice the two-photon probability
/// at small means.
enum class ModeStatistics { kPoissonian, kThermal };

struct SpdcConfig {
  double gain = 0.0;               // per-pulse pair gain, in [0, 1)
  SpdcRegime regime = SpdcRegime::kPulsed;
  double repetition_rate_hz = 0.0;  // pulsed regime
  double background_rate_hz = 0.0;  // cw: accidental photon rate in the
                                    // signal arm, after coupling losses
  double coincidence_window_s = 2e-9;
  double eta_trigger = 1.0;
  double eta_signal = 1.0;
  double jitter_sigma_s = 0.0;  // combined trigger+signal timing std
  ModeStatistics mode_statistics = ModeStatistics::kPoissonian;
};

/// How reported growth projections treat the signal-background cross term.
/// kSourceCorrelated recomputes the full convolution when the collection
/// efficiency changes (background grows with it); kIndependent freezes
/// p2plus at its baseline, which is the constant-noise projection used when
/// quoting collection-efficiency improvements. The generated state itself is
/// the exact convolution either way.
enum class BackgroundCoupling { kSourceCorrelated, kIndependent };

struct QuantumDotConfig {
  double eta_collection = 1.0;
  double mean_background = 0.0;  // mean background photons per window
  BackgroundCoupling coupling = BackgroundCoupling::kSourceCorrelated;
};

using SourceConfig = std::variant<IdealSourceConfig, SpdcConfig, QuantumDotConfig>;

PhotonNumberDistribution ideal_state(const IdealSourceConfig& cfg);

struct HeraldedState {
  PhotonNumberDistribution state;
  double trigger_prob = 0.0;  // per-pulse herald probability
};

/// Heralded signal state of a pulsed SPDC source with two-mode geometric
/// pair statistics P(n pairs) = (1-g) g^n. Conditions on at least one
/// trigger-arm detection (per-photon efficiency eta_trigger), then thins the
/// signal arm by eta_signal times the jitter capture fraction.
HeraldedState spdc_pulsed_heralded(const SpdcConfig& cfg);

/// Heralded signal state of a cw SPDC source: the heralded twin, a Bernoulli
/// photon with probability eta_signal * capture, plus accidental background
/// photons in the window with mean background_rate * window and the
/// configured mode statistics.
PhotonNumberDistribution spdc_cw_heralded(const SpdcConfig& cfg);

/// Quantum-dot cascade signal state: Bernoulli(eta_collection) convolved
/// with Poisson background of the configured per-window mean.
PhotonNumberDistribution quantum_dot_state(const QuantumDotConfig& cfg);

/// Probability that a detection with Gaussian timing jitter (std sigma)
/// falls inside a coincidence window of width tau centered on the expected
/// delay: 2 Phi(tau / (2 sigma)) - 1. One for sigma = 0.
double capture_fraction(double window_s, double jitter_sigma_s);

/// The signal-arm state for any source kind.
PhotonNumberDistribution source_state(const SourceConfig& cfg);

/// The same model with a loss T folded into its parameters (signal/collection
/// efficiency and background means all scale by T). Building the scaled model
/// equals applying the loss channel to the original state, exactly.
SourceConfig scale_signal_efficiency(SourceConfig cfg, double factor);

}  // namespace qng
