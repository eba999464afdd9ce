#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>

namespace qng {

// Default truncation cap for model-generated states. All source models here
// have mean photon number well below one after heralding, so 64 Fock terms
// leave a tail far below the guaranteed bound.
inline constexpr int kDefaultMaxN = 64;

// Tail mass guaranteed to lie beyond the truncation order of model states.
inline constexpr double kTailMassBound = 1e-12;

// |sum - 1| up to this is treated as rounding and renormalized silently;
// anything larger is a modeling error and rejected.
inline constexpr double kNormalizationTol = 1e-9;

/// Power transmittance of a passive linear-loss channel, T in [0, 1].
class Transmittance {
 public:
  explicit Transmittance(double value);

  /// T = 10^(-dB/10); attenuation must be nonnegative.
  static Transmittance from_attenuation_db(double attenuation_db);

  double value() const noexcept { return value_; }

  /// -10 log10(T); +infinity for T = 0.
  double attenuation_db() const;

 private:
  double value_;
};

/// Per-trigger click statistics behind a balanced two-detector splitter:
/// probabilities of no click, exactly one detector clicking, and both
/// clicking. Standard errors are zero for exact model values and filled in
/// by the estimator for counted data.
struct ClickProbabilities {
  double p0 = 1.0;
  double p1 = 0.0;
  double p2plus = 0.0;
  double sigma_p0 = 0.0;
  double sigma_p1 = 0.0;
  double sigma_p2plus = 0.0;
};

/// Photon-number-diagonal state, stored as the probability vector P_0..P_nmax.
///
/// Invariants established at construction: every entry in [0, 1], entries
/// nonnegative, sum within kNormalizationTol of one (then normalized to one
/// exactly). Instances are immutable; all operations are pure functions, so
/// values can be shared freely across threads.
class PhotonNumberDistribution {
 public:
  explicit PhotonNumberDistribution(Eigen::ArrayXd probs);
  PhotonNumberDistribution(std::initializer_list<double> probs);

  const Eigen::ArrayXd& probs() const noexcept { return probs_; }

  int n_max() const noexcept { return static_cast<int>(probs_.size()) - 1; }

  /// P_n; zero beyond the truncation order.
  double p(int n) const;

 private:
  Eigen::ArrayXd probs_;
};

/// The vacuum state {P_0 = 1}.
PhotonNumberDistribution vacuum();

/// Poisson statistics P_n = exp(-mean) mean^n / n!, truncated adaptively so
/// the dropped tail is below kTailMassBound. Throws if the tail bound cannot
/// be met within max_n terms.
PhotonNumberDistribution make_poisson(double mean, int max_n = kDefaultMaxN);

/// Geometric (single-mode thermal) statistics P_n = (1-g) g^n for gain
/// g in [0, 1), truncated adaptively.
PhotonNumberDistribution make_geometric(double gain, int max_n = kDefaultMaxN);

/// Single-mode thermal statistics of the given mean photon number,
/// P_n = mean^n / (1+mean)^(n+1).
PhotonNumberDistribution make_thermal(double mean, int max_n = kDefaultMaxN);

/// Bernoulli occupation {1-p, p}.
PhotonNumberDistribution make_bernoulli(double p);

/// Binomial loss channel: P'_n = sum_{m>=n} C(m,n) T^n (1-T)^(m-n) P_m.
/// Preserves normalization and nonnegativity; scales the mean photon number
/// by exactly T. T = 1 and T = 0 are returned exactly.
PhotonNumberDistribution apply_loss(const PhotonNumberDistribution& dist,
                                    Transmittance t);

/// Distribution of the total photon number of two independent modes.
PhotonNumberDistribution convolve(const PhotonNumberDistribution& a,
                                  const PhotonNumberDistribution& b);

double mean_photon_number(const PhotonNumberDistribution& dist);

/// (p0, p1, p2plus) = (P_0, P_1, sum_{n>=2} P_n), exact from the photon
/// statistics; sigmas are zero.
ClickProbabilities click_probabilities(const PhotonNumberDistribution& dist);

}  // namespace qng
