#include "qng/witnesses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qng {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative guard band at every border. Border ties must classify as not
// witnessed, but states that sit analytically on a border (coherent states
// on the NC one) land on either side of it in floating point; the band makes
// the tie-breaking deterministic and conservative.
constexpr double kBorderGuard = 1e-9;

bool above_border(double value, double border) {
  return value > border * (1.0 + kBorderGuard);
}

bool below_border(double value, double border) {
  return value < border * (1.0 - kBorderGuard);
}

double nc_exact_border(double p0) {
  return p0 > 0.0 ? -p0 * std::log(p0) : 0.0;
}

double nc_approx_border(double p1) { return 0.5 * p1 * p1; }

double qng_approx_border(double p1) { return (2.0 / 3.0) * p1 * p1 * p1; }

double feature_border(Feature feature, double p1) {
  return feature == Feature::kNc ? nc_approx_border(p1)
                                 : qng_approx_border(p1);
}

bool feature_witnessed(Feature feature, const ClickProbabilities& p) {
  return below_border(p.p2plus, feature_border(feature, p.p1));
}

// p2plus over the border value: < 1 inside the witnessed set, and its trend
// along the attenuation scan tells whether the witness can ever fail.
double border_ratio(Feature feature, const ClickProbabilities& p) {
  const double border = feature_border(feature, p.p1);
  if (border <= 0.0) return p.p2plus > 0.0 ? kInf : 0.0;
  return p.p2plus / border;
}

}  // namespace

bool nc_exact(const PhotonNumberDistribution& dist) {
  return above_border(dist.p(1), nc_exact_border(dist.p(0)));
}

bool nc_approx(const ClickProbabilities& p) {
  return below_border(p.p2plus, nc_approx_border(p.p1));
}

bool qng_approx(const ClickProbabilities& p) {
  return below_border(p.p2plus, qng_approx_border(p.p1));
}

WitnessVerdict evaluate_witnesses(const ClickProbabilities& p) {
  WitnessVerdict v;
  v.margins.nc_exact = p.p1 - nc_exact_border(p.p0);
  v.margins.nc_approx = nc_approx_border(p.p1) - p.p2plus;
  v.margins.qng_approx = qng_approx_border(p.p1) - p.p2plus;
  v.margins.wigner = p.p1 - 0.5;
  v.nc_exact = above_border(p.p1, nc_exact_border(p.p0));
  v.nc_approx = nc_approx(p);
  v.qng_approx = qng_approx(p);
  v.wigner_negative_possible = p.p1 > 0.5;
  return v;
}

WitnessVerdict evaluate_witnesses(const PhotonNumberDistribution& dist) {
  return evaluate_witnesses(click_probabilities(dist));
}

WignerNegativityThreshold wigner_negativity_threshold(double p1) {
  if (!(p1 > 0.0)) {
    throw std::domain_error("Wigner threshold requires p1 > 0");
  }
  WignerNegativityThreshold t;
  t.min_transmittance = 1.0 / (2.0 * p1);
  t.attainable = t.min_transmittance < 1.0;
  return t;
}

DepthReport qng_depth_closed_form(const ClickProbabilities& p) {
  if (!(p.p1 > 0.0)) {
    throw std::domain_error("closed-form QNG depth requires p1 > 0");
  }
  DepthReport r;
  r.feature = Feature::kQng;
  r.method = DepthMethod::kClosedForm;
  r.approx_premise_ok = p.p2plus <= 0.1 * p.p1;
  const double t_min = 1.5 * p.p2plus / (p.p1 * p.p1 * p.p1);
  if (p.p2plus == 0.0) {
    r.witnessed_at_unity = true;
    r.unbounded = true;
    r.t_min = 0.0;
    r.depth_db = kInf;
    return r;
  }
  if (t_min >= 1.0) {
    // Not QNG at unit transmittance: no depth to report.
    r.witnessed_at_unity = false;
    r.t_min = 1.0;
    r.depth_db = 0.0;
    return r;
  }
  r.witnessed_at_unity = true;
  r.t_min = t_min;
  r.depth_db = -10.0 * std::log10(t_min);
  return r;
}

DepthReport qng_depth_projected(const ClickProbabilities& p, double p1_factor) {
  if (!(p1_factor > 0.0)) {
    throw std::domain_error("projection factor must be positive");
  }
  ClickProbabilities scaled = p;
  scaled.p1 = p.p1 * p1_factor;
  scaled.p0 = 1.0 - scaled.p1 - scaled.p2plus;  // formal; may leave [0,1]
  return qng_depth_closed_form(scaled);
}

DepthReport depth_bisection(const PhotonNumberDistribution& dist,
                            Feature feature, const BisectionOptions& options) {
  DepthReport r;
  r.feature = feature;
  r.method = DepthMethod::kBisection;
  r.scan_floor_db = options.scan_floor_db;

  const auto witnessed_at = [&](double attenuation_db) {
    const auto lost =
        apply_loss(dist, Transmittance::from_attenuation_db(attenuation_db));
    return feature_witnessed(feature, click_probabilities(lost));
  };

  if (!feature_witnessed(feature, click_probabilities(dist))) {
    r.witnessed_at_unity = false;
    r.t_min = 1.0;
    r.depth_db = 0.0;
    return r;
  }
  r.witnessed_at_unity = true;

  const int steps =
      static_cast<int>(std::round(options.scan_floor_db / options.scan_step_db));
  double crossing_hold_db = -1.0;  // last attenuation before the first failure
  int crossings = 0;
  bool ratio_nonincreasing = true;
  bool prev_witnessed = true;
  double prev_ratio = border_ratio(feature, click_probabilities(dist));
  for (int i = 1; i <= steps; ++i) {
    const double att_db = i * options.scan_step_db;
    const auto clicks = click_probabilities(
        apply_loss(dist, Transmittance::from_attenuation_db(att_db)));
    const bool w = feature_witnessed(feature, clicks);
    const double ratio = border_ratio(feature, clicks);
    if (ratio > prev_ratio * (1.0 + 1e-9) + 1e-15) ratio_nonincreasing = false;
    prev_ratio = ratio;
    if (prev_witnessed && !w) {
      ++crossings;
      if (crossings == 1) crossing_hold_db = (i - 1) * options.scan_step_db;
    }
    prev_witnessed = w;
  }

  if (crossings == 0 && prev_witnessed) {
    if (ratio_nonincreasing) {
      r.unbounded = true;
      r.t_min = 0.0;
      r.depth_db = kInf;
    } else {
      r.censored = true;
      r.depth_db = options.scan_floor_db;
      r.t_min = Transmittance::from_attenuation_db(r.depth_db).value();
    }
    return r;
  }

  r.single_crossing = crossings == 1;
  double hold_db = crossing_hold_db;
  double fail_db = crossing_hold_db + options.scan_step_db;
  while (fail_db - hold_db > options.tol_db) {
    const double mid_db = 0.5 * (hold_db + fail_db);
    if (witnessed_at(mid_db)) {
      hold_db = mid_db;
    } else {
      fail_db = mid_db;
    }
  }
  r.depth_db = hold_db;
  r.t_min = Transmittance::from_attenuation_db(hold_db).value();
  return r;
}

std::vector<TrajectoryPoint> attenuation_trajectory(
    const PhotonNumberDistribution& dist,
    std::span<const double> attenuations_db) {
  std::vector<TrajectoryPoint> points;
  points.reserve(attenuations_db.size());
  for (double att_db : attenuations_db) {
    const auto clicks = click_probabilities(
        apply_loss(dist, Transmittance::from_attenuation_db(att_db)));
    points.push_back({att_db, clicks.p1, clicks.p2plus});
  }
  return points;
}

double fiber_range_km(double depth_db, double loss_db_per_km) {
  if (!(loss_db_per_km > 0.0)) {
    throw std::domain_error("fiber loss must be positive dB/km");
  }
  if (!(depth_db >= 0.0)) {
    throw std::domain_error("depth must be nonnegative dB");
  }
  return depth_db / loss_db_per_km;
}

}  // namespace qng
