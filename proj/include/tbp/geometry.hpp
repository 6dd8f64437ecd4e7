#pragma once

#include <optional>

#include "tbp/manifold.hpp"
#include "tbp/types.hpp"

namespace tbp {

// N(beta_star, sigma) ambient density plus its whitening transform W, with
// W^T W = sigma^{-1} (Cholesky-based, W lower triangular inverse).
struct AmbientGaussian {
  Vec beta_star;
  Mat sigma;
  Mat whitener;
  double sigma_min_sq = 1.0;  // smallest eigenvalue of sigma

  static AmbientGaussian standard(Eigen::Index d);
  static AmbientGaussian make(Vec beta_star, Mat sigma);

  Eigen::Index d() const { return beta_star.size(); }
  bool is_whitened() const;
};

// Everything the upsampler needs at one base point.
struct GeometryAtPoint {
  Vec theta;
  Vec alpha;
  Mat jacobian;          // d x s
  Mat metric;            // F_I = J^T S J, s x s
  Mat pseudoinverse;     // J^+ = F_I^{-1} J^T S, s x d
  Mat pseudoinverse_t;   // J^+ transposed (d x s, contiguous rows of J^+)
  std::optional<Mat> second_form;  // F_II, s x s
  std::optional<double> kappa;     // curvature scale, >= 0
  bool singular = false;           // metric failed the rank test
};

// F_I is declared singular when its smallest |eigenvalue| falls below
// rank_tol times the largest (or the matrix is identically zero).
inline constexpr double kRankTol = 1e-12;

Mat pullback_metric(const Mat& jacobian, const Vec& signature);

// F_I^{-1} J^T S. Throws SingularMetric (carrying theta) past the rank test.
Mat pseudoinverse(const Mat& jacobian, const Mat& metric, const Vec& signature,
                  const Vec& theta = Vec());

// P_perp v = J (J^+ v).
Vec project_tangent(const Mat& jacobian, const Mat& pinv, const Vec& v);

// Entry (mu,mu') = |(I - P_perp) H[:,mu,mu']| with the signature-weighted
// norm taken in absolute value.
Mat second_fundamental_form(const Mat& jacobian, const Mat& pinv, const HessianTensor& hessian,
                            const Vec& signature);

// Largest |eigenvalue| of K = Q^T F_II Q where Q whitens F_I.
double curvature_scale(const Mat& metric, const Mat& second_form, const Vec& theta = Vec());

// Gamma = J^T Sigma^{-1} J.
Mat fisher_matrix(const Mat& jacobian, const AmbientGaussian& gaussian);

// Whitened pair: map' = W (alpha - beta_star), gaussian' = N(0, I).
struct WhitenedPair {
  ManifoldModel model;
  AmbientGaussian gaussian;
};
WhitenedPair whiten(const ManifoldModel& model, const AmbientGaussian& gaussian);

// Computes metric, pseudoinverse, and (Hessian permitting) the second form
// and curvature scale at one point. Never throws on singular metrics;
// flags them instead.
GeometryAtPoint geometry_at(const ManifoldModel& model, const Vec& theta);
GeometryAtPoint geometry_at(const ManifoldModel& model, const Vec& theta, const Vec& alpha,
                            const Mat& jacobian, const HessianTensor* hessian);

}  // namespace tbp
