#include "tbp/compactness.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "tbp/errors.hpp"

namespace tbp {

SamplingRegion::SamplingRegion(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw InvalidInput("sampling region bounds must have equal nonzero length");
  if (!((upper - lower).array() > 0.0).all())
    throw InvalidInput("sampling region requires upper > lower componentwise");
}

bool SamplingRegion::contains(const Vec& theta) const {
  return (theta.array() >= lower.array()).all() && (theta.array() <= upper.array()).all();
}

CompactnessMode compactness_mode_from_string(const std::string& name) {
  if (name == "metric_and_curvature") return CompactnessMode::metric_and_curvature;
  if (name == "metric_only") return CompactnessMode::metric_only;
  if (name == "constant") return CompactnessMode::constant;
  throw ConfigError("unknown compactness mode '" + name + "'");
}

const char* to_string(CompactnessMode mode) {
  switch (mode) {
    case CompactnessMode::metric_and_curvature: return "metric_and_curvature";
    case CompactnessMode::metric_only: return "metric_only";
    case CompactnessMode::constant: return "constant";
  }
  return "?";
}

void CompactnessConfig::validate() const {
  if (!(epsilon > 0)) throw ConfigError("compactness epsilon must be > 0");
  if (mode == CompactnessMode::constant && !(constant_c > 0))
    throw ConfigError("constant compactness requires constant_c > 0");
}

double region_scale(const Mat& pinv, const SamplingRegion& region) {
  if (!pinv.allFinite()) throw InvalidInput("pseudoinverse has non-finite entries");
  if (pinv.rows() != region.dim()) throw InvalidInput("region dimension mismatch");
  const Vec l_sqrt = region.box_scale_diag().cwiseSqrt();
  const Mat a = l_sqrt.asDiagonal() * pinv;  // s x d
  Eigen::SelfAdjointEigenSolver<Mat> es(a * a.transpose(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double compactness(double lambda_sq, std::optional<double> kappa, const CompactnessConfig& cfg) {
  cfg.validate();
  double c;
  switch (cfg.mode) {
    case CompactnessMode::constant:
      c = cfg.constant_c;
      break;
    case CompactnessMode::metric_only:
      c = lambda_sq / cfg.epsilon;
      break;
    case CompactnessMode::metric_and_curvature:
      c = (kappa ? std::max(lambda_sq, *kappa) : lambda_sq) / cfg.epsilon;
      break;
    default:
      c = 0;
  }
  if (!(c > 0) || !std::isfinite(c)) throw DegenerateCompactness("compactness is not a positive finite value");
  return c;
}

}  // namespace tbp
