#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qng/fock.hpp"

namespace qng {

enum class Feature { kNc, kQng };
enum class DepthMethod { kClosedForm, kBisection };

/// Signed distances to the witness borders; positive means the feature is
/// witnessed. nc_exact is P1 + P0 ln P0; the approximate NC/QNG margins are
/// border - p2plus on the (p1, p2plus) plane; wigner is p1 - 1/2.
struct WitnessMargins {
  double nc_exact = 0.0;
  double nc_approx = 0.0;
  double qng_approx = 0.0;
  double wigner = 0.0;
};

struct WitnessVerdict {
  bool nc_exact = false;
  bool nc_approx = false;
  bool qng_approx = false;
  bool wigner_negative_possible = false;
  WitnessMargins margins;
};

/// Exact nonclassicality witness P1 > -P0 ln P0. The bound is zero at
/// P0 = 0, so any P1 > 0 passes there. Coherent (Poisson) statistics sit
/// exactly on this border; border ties classify as not witnessed.
bool nc_exact(const PhotonNumberDistribution& dist);

/// Approximate nonclassicality border p2plus < p1^2 / 2.
bool nc_approx(const ClickProbabilities& p);

/// Approximate quantum non-Gaussianity border p2plus < 2 p1^3 / 3.
bool qng_approx(const ClickProbabilities& p);

WitnessVerdict evaluate_witnesses(const PhotonNumberDistribution& dist);
WitnessVerdict evaluate_witnesses(const ClickProbabilities& p);

/// Minimum further transmittance for a negative Wigner function,
/// T > 1/(2 p1), valid for p2plus << p1. min_transmittance may exceed 1,
/// in which case negativity is unattainable at any attenuator setting.
struct WignerNegativityThreshold {
  double min_transmittance = 0.0;
  bool attainable = false;
};

WignerNegativityThreshold wigner_negativity_threshold(double p1);

struct DepthReport {
  Feature feature = Feature::kQng;
  DepthMethod method = DepthMethod::kClosedForm;
  double t_min = 1.0;      // smallest transmittance with the witness holding
  double depth_db = 0.0;   // -10 log10(t_min); +inf when unbounded
  bool witnessed_at_unity = false;
  // Witness held at every scanned attenuation and the border ratio never
  // worsened: the depth is unbounded (+inf), verified down to scan_floor_db.
  bool unbounded = false;
  // Witness still held at the scan floor but the border ratio was rising:
  // the reported depth is the verified floor, the true depth lies beyond it.
  bool censored = false;
  double scan_floor_db = 0.0;
  bool approx_premise_ok = true;  // closed form only: p2plus <= 0.1 p1
  bool single_crossing = true;    // bisection only: one sign change seen
  std::optional<double> fiber_km;
};

/// Closed-form QNG depth T_min = (3/2) p2plus / p1^3, valid for
/// p2plus << p1 (approx_premise_ok reports the p2plus <= 0.1 p1 check).
/// T_min >= 1 means the state is not QNG: depth 0, witnessed_at_unity false.
DepthReport qng_depth_closed_form(const ClickProbabilities& p);

/// Closed-form QNG depth with p1 scaled by p1_factor at constant p2plus.
/// The scaled point is a parameter extrapolation, not a physical state, so
/// only the closed form applies.
DepthReport qng_depth_projected(const ClickProbabilities& p, double p1_factor);

struct BisectionOptions {
  double scan_floor_db = 60.0;
  double scan_step_db = 0.1;
  double tol_db = 1e-9;
};

/// Exact depth of the requested feature under the full binomial loss map:
/// scans attenuation on a uniform dB grid, then bisects the bracketing
/// interval at the first loss of the witness. The reported t_min is the
/// deepest setting at which the witness was actually verified to hold, so
/// the report never overstates the depth.
DepthReport depth_bisection(const PhotonNumberDistribution& dist,
                            Feature feature,
                            const BisectionOptions& options = {});

struct TrajectoryPoint {
  double attenuation_db = 0.0;
  double p1 = 0.0;
  double p2plus = 0.0;
};

/// (p1, p2plus) of the state after each requested attenuation, under the
/// full loss map.
std::vector<TrajectoryPoint> attenuation_trajectory(
    const PhotonNumberDistribution& dist, std::span<const double> attenuations_db);

/// depth_db / loss_db_per_km.
double fiber_range_km(double depth_db, double loss_db_per_km);

}  // namespace qng
