#pragma once

#include <optional>
#include <string>

#include "tbp/types.hpp"

namespace tbp {

// Hyperrectangular sampling region with per-coordinate half-lengths.
struct SamplingRegion {
  Vec lower;
  Vec upper;

  SamplingRegion() = default;
  SamplingRegion(Vec lo, Vec hi);

  Eigen::Index dim() const { return lower.size(); }
  Vec half_lengths() const { return 0.5 * (upper - lower); }
  Vec centroid() const { return 0.5 * (upper + lower); }
  // Diagonal of L = diag(1/l_mu^2).
  Vec box_scale_diag() const { return half_lengths().array().square().inverse(); }
  bool contains(const Vec& theta) const;
};

enum class CompactnessMode { metric_and_curvature, metric_only, constant };

CompactnessMode compactness_mode_from_string(const std::string& name);
const char* to_string(CompactnessMode mode);

struct CompactnessConfig {
  double epsilon = 0.1;
  CompactnessMode mode = CompactnessMode::metric_and_curvature;
  double constant_c = 1.0;

  void validate() const;
};

// Largest eigenvalue of Lambda = (J^+)^T L J^+, obtained as the largest
// squared singular value of L^{1/2} J^+ (an s x s eigenproblem, not d x d).
double region_scale(const Mat& pinv, const SamplingRegion& region);

// c = max{lambda^2, kappa}/eps (whitened form). Falls back to metric-only
// when no curvature estimate is available. Throws DegenerateCompactness when
// the result is non-positive or non-finite.
double compactness(double lambda_sq, std::optional<double> kappa, const CompactnessConfig& cfg);

}  // namespace tbp
