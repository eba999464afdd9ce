#include "qng/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace qng {
namespace {

ProfilePoint evaluate_exact(const SourceConfig& cfg, double value) {
  const auto state = source_state(cfg);
  const auto clicks = click_probabilities(state);
  const auto depth = depth_bisection(state, Feature::kQng);
  ProfilePoint pt;
  pt.value = value;
  pt.p1 = clicks.p1;
  pt.p2plus = clicks.p2plus;
  pt.t_min = depth.t_min;
  pt.depth_db = depth.witnessed_at_unity ? depth.depth_db : 0.0;
  return pt;
}

bool is_constant_p2plus_projection(const SweepSpec& spec) {
  if (spec.parameter != SweepParameter::kEtaCol) return false;
  const auto* qd = std::get_if<QuantumDotConfig>(&spec.fixed);
  return qd && qd->coupling == BackgroundCoupling::kIndependent;
}

double objective(const SweepSpec& spec, double value) {
  if (is_constant_p2plus_projection(spec)) {
    const auto& qd = std::get<QuantumDotConfig>(spec.fixed);
    const auto baseline = click_probabilities(quantum_dot_state(qd));
    const auto report =
        qng_depth_projected(baseline, value / qd.eta_collection);
    return report.witnessed_at_unity ? report.depth_db : 0.0;
  }
  const auto pt = evaluate_exact(with_parameter(spec.fixed, spec.parameter,
                                                value),
                                 value);
  return pt.depth_db;
}

double background_p2_ratio_to_thermal(ModeStatistics statistics, double mean) {
  if (statistics == ModeStatistics::kThermal || mean <= 0.0) return 1.0;
  const double thermal_p2 = make_thermal(mean).p(2);
  const double poisson_p2 = make_poisson(mean).p(2);
  return thermal_p2 > 0.0 ? poisson_p2 / thermal_p2 : 1.0;
}

}  // namespace

double qng_depth_db(const SourceConfig& cfg) {
  const auto report = depth_bisection(source_state(cfg), Feature::kQng);
  return report.witnessed_at_unity ? report.depth_db : 0.0;
}

SourceConfig with_parameter(SourceConfig cfg, SweepParameter parameter,
                            double value) {
  switch (parameter) {
    case SweepParameter::kTau: {
      auto* spdc = std::get_if<SpdcConfig>(&cfg);
      if (!spdc) throw std::invalid_argument("tau sweep needs an SPDC source");
      spdc->coincidence_window_s = value;
      break;
    }
    case SweepParameter::kGain: {
      auto* spdc = std::get_if<SpdcConfig>(&cfg);
      if (!spdc) throw std::invalid_argument("gain sweep needs an SPDC source");
      spdc->gain = value;
      break;
    }
    case SweepParameter::kEtaSignal: {
      if (auto* spdc = std::get_if<SpdcConfig>(&cfg)) {
        spdc->eta_signal = value;
      } else if (auto* ideal = std::get_if<IdealSourceConfig>(&cfg)) {
        ideal->eta = value;
      } else {
        throw std::invalid_argument(
            "eta_signal sweep needs an SPDC or ideal source");
      }
      break;
    }
    case SweepParameter::kLambdaBg: {
      auto* qd = std::get_if<QuantumDotConfig>(&cfg);
      if (!qd) {
        throw std::invalid_argument(
            "lambda_bg sweep needs a quantum-dot source");
      }
      qd->mean_background = value;
      break;
    }
    case SweepParameter::kEtaCol: {
      auto* qd = std::get_if<QuantumDotConfig>(&cfg);
      if (!qd) {
        throw std::invalid_argument("eta_col sweep needs a quantum-dot source");
      }
      qd->eta_collection = value;
      break;
    }
  }
  return cfg;
}

OptimizationResult sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep grid is empty");

  OptimizationResult result;
  result.profile.reserve(spec.grid.size());

  if (is_constant_p2plus_projection(spec)) {
    const auto& qd = std::get<QuantumDotConfig>(spec.fixed);
    if (!(qd.eta_collection > 0.0)) {
      throw std::domain_error("projection needs a positive baseline eta_col");
    }
    const auto baseline = click_probabilities(quantum_dot_state(qd));
    for (const double value : spec.grid) {
      const auto report =
          qng_depth_projected(baseline, value / qd.eta_collection);
      ProfilePoint pt;
      pt.value = value;
      pt.p1 = baseline.p1 * (value / qd.eta_collection);
      pt.p2plus = baseline.p2plus;
      pt.t_min = report.t_min;
      pt.depth_db = report.witnessed_at_unity ? report.depth_db : 0.0;
      result.profile.push_back(pt);
    }
  } else {
    for (const double value : spec.grid) {
      result.profile.push_back(evaluate_exact(
          with_parameter(spec.fixed, spec.parameter, value), value));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.profile.size(); ++i) {
    if (result.profile[i].depth_db > result.profile[best].depth_db) best = i;
  }
  result.best_value = result.profile[best].value;
  result.best_depth_db = result.profile[best].depth_db;
  result.boundary = best == 0 || best + 1 == result.profile.size();
  return result;
}

double golden_section_max(const std::function<double(double)>& f, double a,
                          double b, double rel_tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > rel_tol * std::max({std::abs(a), std::abs(b), 1e-300})) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

OptimizationResult refine(const OptimizationResult& result,
                          const SweepSpec& spec, double rel_tol) {
  if (result.profile.size() != spec.grid.size()) {
    throw std::invalid_argument("result does not match the sweep spec");
  }
  if (result.boundary || result.profile.size() < 3) {
    OptimizationResult flagged = result;
    flagged.boundary = true;
    return flagged;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.profile.size(); ++i) {
    if (result.profile[i].depth_db > result.profile[best].depth_db) best = i;
  }
  const double lo = result.profile[best - 1].value;
  const double hi = result.profile[best + 1].value;
  const double refined = golden_section_max(
      [&](double v) { return objective(spec, v); }, lo, hi, rel_tol);

  OptimizationResult out = result;
  out.best_value = refined;
  out.best_depth_db = objective(spec, refined);
  return out;
}

CwPulsedComparison compare_cw_pulsed(const SpdcConfig& cw,
                                     const SpdcConfig& pulsed) {
  if (cw.regime != SpdcRegime::kCw || pulsed.regime != SpdcRegime::kPulsed) {
    throw std::invalid_argument(
        "compare_cw_pulsed needs one cw and one pulsed config");
  }
  const auto clicks_cw = click_probabilities(spdc_cw_heralded(cw));
  const auto clicks_pulsed =
      click_probabilities(spdc_pulsed_heralded(pulsed).state);
  if (!(clicks_cw.p1 > 0.0) || !(clicks_pulsed.p1 > 0.0)) {
    throw std::domain_error("comparison requires p1 > 0 on both sides");
  }

  CwPulsedComparison c;
  // Raw closed-form minimum transmittances, unclamped so the ratio stays
  // meaningful even when one side is not QNG.
  c.t_min_cw = 1.5 * clicks_cw.p2plus / std::pow(clicks_cw.p1, 3);
  c.t_min_pulsed = 1.5 * clicks_pulsed.p2plus / std::pow(clicks_pulsed.p1, 3);
  c.ratio = c.t_min_pulsed > 0.0 ? c.t_min_cw / c.t_min_pulsed
                                 : std::numeric_limits<double>::infinity();
  c.predicted_ratio_tau_nu =
      cw.coincidence_window_s * pulsed.repetition_rate_hz;
  c.p1_cw = clicks_cw.p1;
  c.p1_pulsed = clicks_pulsed.p1;
  c.p1_matched = clicks_pulsed.p1 > 0.0 &&
                 std::abs(clicks_cw.p1 / clicks_pulsed.p1 - 1.0) <= 0.01;
  c.mode_statistics_factor = background_p2_ratio_to_thermal(
      cw.mode_statistics, cw.background_rate_hz * cw.coincidence_window_s);
  return c;
}

void write_profile_csv(std::ostream& out, const OptimizationResult& result) {
  out << "parameter_value,p1,p2plus,t_min,depth_db\n";
  char row[256];
  for (const auto& pt : result.profile) {
    std::snprintf(row, sizeof(row), "%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  pt.value, pt.p1, pt.p2plus, pt.t_min, pt.depth_db);
    out << row;
  }
}

}  // namespace qng
