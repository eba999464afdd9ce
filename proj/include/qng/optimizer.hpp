#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "qng/sources.hpp"
#include "qng/witnesses.hpp"

namespace qng {

enum class SweepParameter { kTau, kGain, kEtaSignal, kLambdaBg, kEtaCol };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kTau;
  std::vector<double> grid;
  SourceConfig fixed = IdealSourceConfig{};
};

struct ProfilePoint {
  double value = 0.0;
  double p1 = 0.0;
  double p2plus = 0.0;
  double t_min = 1.0;
  double depth_db = 0.0;
};

struct OptimizationResult {
  double best_value = 0.0;
  double best_depth_db = 0.0;
  std::vector<ProfilePoint> profile;
  bool boundary = false;  // optimum sits on a grid edge
};

/// QNG depth of the configured source, by bisection under the full loss
/// map. Zero when the state is not QNG at unit transmittance.
double qng_depth_db(const SourceConfig& cfg);

/// The fixed config with one parameter replaced; throws when the parameter
/// does not apply to the source kind or leaves its domain.
SourceConfig with_parameter(SourceConfig cfg, SweepParameter parameter,
                            double value);

/// Evaluates the QNG depth over the grid. Grid points where the witness
/// fails are recorded with depth 0, not treated as errors. A quantum-dot
/// collection sweep with independent background coupling reports the
/// constant-p2plus projection (closed form at scaled p1); every other sweep
/// rebuilds the exact state and bisects.
OptimizationResult sweep(const SweepSpec& spec);

/// Golden-section refinement around an interior grid maximum, to the given
/// relative tolerance in the parameter. A boundary optimum is returned
/// unchanged with the boundary flag set.
OptimizationResult refine(const OptimizationResult& result,
                          const SweepSpec& spec, double rel_tol = 1e-3);

/// Maximizes a unimodal objective on [a, b] by golden-section search.
double golden_section_max(const std::function<double(double)>& f, double a,
                          double b, double rel_tol);

/// The cw/pulsed minimum-transmittance comparison for matched sources
/// (equal p1 at zero attenuation, pulsed gain = cw background rate over the
/// repetition rate). ratio is predicted to approach tau * nu.
struct CwPulsedComparison {
  double t_min_cw = 0.0;
  double t_min_pulsed = 0.0;
  double ratio = 0.0;
  double predicted_ratio_tau_nu = 0.0;
  double p1_cw = 0.0;
  double p1_pulsed = 0.0;
  bool p1_matched = false;  // within 1 percent
  // Two-photon probability of the cw background statistics relative to a
  // single-mode thermal background of equal mean: ~1/2 for the poissonian
  // (many-mode) case at small means, 1 for thermal.
  double mode_statistics_factor = 1.0;
};

CwPulsedComparison compare_cw_pulsed(const SpdcConfig& cw,
                                     const SpdcConfig& pulsed);

/// Profile rows as CSV: parameter_value,p1,p2plus,t_min,depth_db.
void write_profile_csv(std::ostream& out, const OptimizationResult& result);

}  // namespace qng
