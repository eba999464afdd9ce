#include "qng/sources.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qng {
namespace {

void validate_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in [0, 1]");
  }
}

void validate_spdc_common(const SpdcConfig& cfg) {
  if (!(cfg.gain >= 0.0 && cfg.gain < 1.0)) {
    throw std::domain_error("SPDC gain must lie in [0, 1)");
  }
  if (!(cfg.coincidence_window_s > 0.0)) {
    throw std::domain_error("coincidence window must be positive");
  }
  if (!(cfg.jitter_sigma_s >= 0.0)) {
    throw std::domain_error("jitter sigma must be nonnegative");
  }
  validate_unit_interval(cfg.eta_trigger, "eta_trigger");
  validate_unit_interval(cfg.eta_signal, "eta_signal");
}

// P[Bin(n, p) = k] for the small n used in the herald enumeration.
double binomial_pmf_small(int k, int n, double p) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

}  // namespace

PhotonNumberDistribution ideal_state(const IdealSourceConfig& cfg) {
  validate_unit_interval(cfg.eta, "eta");
  return make_bernoulli(cfg.eta);
}

double capture_fraction(double window_s, double jitter_sigma_s) {
  if (!(window_s > 0.0)) throw std::domain_error("window must be positive");
  if (!(jitter_sigma_s >= 0.0)) {
    throw std::domain_error("jitter sigma must be nonnegative");
  }
  if (jitter_sigma_s == 0.0) return 1.0;
  // 2 Phi(tau / (2 sigma)) - 1 = erf(tau / (2 sigma sqrt(2)))
  return std::erf(window_s / (2.0 * jitter_sigma_s * std::sqrt(2.0)));
}

HeraldedState spdc_pulsed_heralded(const SpdcConfig& cfg) {
  if (cfg.regime != SpdcRegime::kPulsed) {
    throw std::invalid_argument("spdc_pulsed_heralded needs a pulsed config");
  }
  validate_spdc_common(cfg);
  if (!(cfg.repetition_rate_hz > 0.0)) {
    throw std::domain_error("pulsed regime requires a repetition rate");
  }
  if (!(cfg.gain > 0.0)) {
    throw std::domain_error("heralding requires gain > 0");
  }
  if (!(cfg.eta_trigger > 0.0)) {
    throw std::domain_error("heralding requires eta_trigger > 0");
  }

  const double g = cfg.gain;
  const double eta_eff =
      cfg.eta_signal *
      capture_fraction(cfg.coincidence_window_s, cfg.jitter_sigma_s);

  // Bayes over the pair number n: weight (1-g) g^n, herald probability
  // 1 - (1-eta_trigger)^n, signal arm binomially thinned by eta_eff.
  constexpr int kMaxPairs = 512;
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(kMaxPairs + 1);
  double trigger_prob = 0.0;
  double weight = 1.0 - g;
  int top = 0;
  for (int n = 0; n <= kMaxPairs; ++n) {
    const double herald = 1.0 - std::pow(1.0 - cfg.eta_trigger, n);
    const double w = weight * herald;
    if (n > 0 && w > 0.0) {
      trigger_prob += w;
      top = n;
      for (int k = 0; k <= n; ++k) {
        acc[k] += w * binomial_pmf_small(k, n, eta_eff);
      }
    }
    weight *= g;
    if (n > 0 && weight < 1e-16 * trigger_prob) break;
  }
  if (!(trigger_prob > 0.0)) {
    throw std::domain_error("herald probability vanished; check gain");
  }
  return HeraldedState{
      PhotonNumberDistribution(acc.head(top + 1) / trigger_prob),
      trigger_prob};
}

PhotonNumberDistribution spdc_cw_heralded(const SpdcConfig& cfg) {
  if (cfg.regime != SpdcRegime::kCw) {
    throw std::invalid_argument("spdc_cw_heralded needs a cw config");
  }
  validate_spdc_common(cfg);
  if (!(cfg.background_rate_hz >= 0.0)) {
    throw std::domain_error("background rate must be nonnegative");
  }
  const double eta_eff =
      cfg.eta_signal *
      capture_fraction(cfg.coincidence_window_s, cfg.jitter_sigma_s);
  const double bg_mean = cfg.background_rate_hz * cfg.coincidence_window_s;
  const auto twin = make_bernoulli(eta_eff);
  if (bg_mean == 0.0) return twin;
  const auto background = cfg.mode_statistics == ModeStatistics::kPoissonian
                              ? make_poisson(bg_mean)
                              : make_thermal(bg_mean);
  return convolve(twin, background);
}

PhotonNumberDistribution quantum_dot_state(const QuantumDotConfig& cfg) {
  validate_unit_interval(cfg.eta_collection, "eta_collection");
  if (!(cfg.mean_background >= 0.0)) {
    throw std::domain_error("mean background must be nonnegative");
  }
  const auto signal = make_bernoulli(cfg.eta_collection);
  if (cfg.mean_background == 0.0) return signal;
  return convolve(signal, make_poisson(cfg.mean_background));
}

PhotonNumberDistribution source_state(const SourceConfig& cfg) {
  return std::visit(
      [](const auto& c) -> PhotonNumberDistribution {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, IdealSourceConfig>) {
          return ideal_state(c);
        } else if constexpr (std::is_same_v<T, SpdcConfig>) {
          return c.regime == SpdcRegime::kPulsed ? spdc_pulsed_heralded(c).state
                                                 : spdc_cw_heralded(c);
        } else {
          return quantum_dot_state(c);
        }
      },
      cfg);
}

SourceConfig scale_signal_efficiency(SourceConfig cfg, double factor) {
  if (!(factor >= 0.0 && factor <= 1.0)) {
    throw std::domain_error("efficiency scale factor must lie in [0, 1]");
  }
  std::visit(
      [factor](auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, IdealSourceConfig>) {
          c.eta *= factor;
        } else if constexpr (std::is_same_v<T, SpdcConfig>) {
          c.eta_signal *= factor;
          c.background_rate_hz *= factor;  // background sits behind the loss
        } else {
          c.eta_collection *= factor;
          c.mean_background *= factor;
        }
      },
      cfg);
  return cfg;
}

}  // namespace qng
