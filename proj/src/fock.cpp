#include "qng/fock.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qng {
namespace {

double log_choose(int m, int n) {
  return std::lgamma(m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m - n + 1.0);
}

// P[Bin(m, t) = n]. Exact-coefficient path below m = 30, log-space above to
// avoid overflow and underflow.
double binomial_pmf(int n, int m, double t) {
  if (n > m || n < 0) return 0.0;
  if (t == 0.0) return n == 0 ? 1.0 : 0.0;
  if (t == 1.0) return n == m ? 1.0 : 0.0;
  if (m <= 30) {
    double c = 1.0;
    for (int k = 0; k < n; ++k) c = c * (m - k) / (k + 1);
    return c * std::pow(t, n) * std::pow(1.0 - t, m - n);
  }
  return std::exp(log_choose(m, n) + n * std::log(t) +
                  (m - n) * std::log1p(-t));
}

// Smallest order such that the dropped tail of a distribution with tail
// ratio r (P_{n+1}/P_n -> r) stays below kTailMassBound: tail = r^(n+1).
int geometric_like_order(double ratio) {
  if (ratio <= 0.0) return 0;
  const double need = std::log(kTailMassBound) / std::log(ratio);
  return std::max(0, static_cast<int>(std::ceil(need)) - 1);
}

}  // namespace

Transmittance::Transmittance(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error("transmittance must lie in [0, 1], got " +
                            std::to_string(value));
  }
}

Transmittance Transmittance::from_attenuation_db(double attenuation_db) {
  if (!(attenuation_db >= 0.0)) {
    throw std::domain_error("attenuation must be nonnegative dB");
  }
  if (std::isinf(attenuation_db)) return Transmittance(0.0);
  return Transmittance(std::pow(10.0, -attenuation_db / 10.0));
}

double Transmittance::attenuation_db() const {
  if (value_ == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(value_);
}

PhotonNumberDistribution::PhotonNumberDistribution(Eigen::ArrayXd probs)
    : probs_(std::move(probs)) {
  if (probs_.size() == 0) {
    throw std::invalid_argument("photon distribution needs at least P0");
  }
  if ((probs_ < 0.0).any() || !probs_.isFinite().all()) {
    throw std::invalid_argument(
        "photon distribution entries must be finite and nonnegative");
  }
  const double sum = probs_.sum();
  if (std::abs(sum - 1.0) > kNormalizationTol) {
    throw std::invalid_argument("photon distribution sums to " +
                                std::to_string(sum) +
                                ", outside the normalization tolerance");
  }
  probs_ /= sum;
}

PhotonNumberDistribution::PhotonNumberDistribution(
    std::initializer_list<double> probs)
    : PhotonNumberDistribution(Eigen::Map<const Eigen::ArrayXd>(
          probs.begin(), static_cast<Eigen::Index>(probs.size()))) {}

double PhotonNumberDistribution::p(int n) const {
  if (n < 0) throw std::out_of_range("photon number must be nonnegative");
  if (n >= probs_.size()) return 0.0;
  return probs_[n];
}

PhotonNumberDistribution vacuum() {
  return PhotonNumberDistribution(Eigen::ArrayXd::Ones(1));
}

PhotonNumberDistribution make_poisson(double mean, int max_n) {
  if (!(mean >= 0.0)) throw std::domain_error("Poisson mean must be >= 0");
  Eigen::ArrayXd probs = Eigen::ArrayXd::Zero(max_n + 1);
  double term = std::exp(-mean);
  double cum = 0.0;
  for (int n = 0; n <= max_n; ++n) {
    probs[n] = term;
    cum += term;
    if (1.0 - cum < kTailMassBound) {
      return PhotonNumberDistribution(probs.head(n + 1));
    }
    term *= mean / (n + 1);
  }
  throw std::domain_error("Poisson mean " + std::to_string(mean) +
                          " cannot meet the tail bound within " +
                          std::to_string(max_n) + " terms");
}

PhotonNumberDistribution make_geometric(double gain, int max_n) {
  if (!(gain >= 0.0 && gain < 1.0)) {
    throw std::domain_error("geometric gain must lie in [0, 1)");
  }
  const int order = geometric_like_order(gain);
  if (order > max_n) {
    throw std::domain_error("geometric gain " + std::to_string(gain) +
                            " cannot meet the tail bound within " +
                            std::to_string(max_n) + " terms");
  }
  Eigen::ArrayXd probs(order + 1);
  double term = 1.0 - gain;
  for (int n = 0; n <= order; ++n) {
    probs[n] = term;
    term *= gain;
  }
  return PhotonNumberDistribution(std::move(probs));
}

PhotonNumberDistribution make_thermal(double mean, int max_n) {
  if (!(mean >= 0.0)) throw std::domain_error("thermal mean must be >= 0");
  return make_geometric(mean / (1.0 + mean), max_n);
}

PhotonNumberDistribution make_bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("Bernoulli probability must lie in [0, 1]");
  }
  if (p == 0.0) return vacuum();
  return PhotonNumberDistribution{1.0 - p, p};
}

PhotonNumberDistribution apply_loss(const PhotonNumberDistribution& dist,
                                    Transmittance t) {
  const double T = t.value();
  if (T == 1.0) return dist;
  if (T == 0.0) return vacuum();
  const Eigen::ArrayXd& p = dist.probs();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(p.size());
  for (int m = 0; m < p.size(); ++m) {
    if (p[m] == 0.0) continue;
    for (int n = 0; n <= m; ++n) {
      out[n] += p[m] * binomial_pmf(n, m, T);
    }
  }
  return PhotonNumberDistribution(std::move(out));
}

PhotonNumberDistribution convolve(const PhotonNumberDistribution& a,
                                  const PhotonNumberDistribution& b) {
  const Eigen::ArrayXd& pa = a.probs();
  const Eigen::ArrayXd& pb = b.probs();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(pa.size() + pb.size() - 1);
  for (int i = 0; i < pa.size(); ++i) {
    if (pa[i] == 0.0) continue;
    for (int j = 0; j < pb.size(); ++j) {
      out[i + j] += pa[i] * pb[j];
    }
  }
  return PhotonNumberDistribution(std::move(out));
}

double mean_photon_number(const PhotonNumberDistribution& dist) {
  const Eigen::ArrayXd& p = dist.probs();
  const Eigen::ArrayXd n =
      Eigen::ArrayXd::LinSpaced(p.size(), 0.0, static_cast<double>(p.size() - 1));
  return (p * n).sum();
}

ClickProbabilities click_probabilities(const PhotonNumberDistribution& dist) {
  const Eigen::ArrayXd& p = dist.probs();
  ClickProbabilities c;
  c.p0 = p[0];
  c.p1 = p.size() > 1 ? p[1] : 0.0;
  c.p2plus = p.size() > 2 ? p.tail(p.size() - 2).sum() : 0.0;
  return c;
}

}  // namespace qng
