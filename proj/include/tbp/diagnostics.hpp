#pragma once

#include <functional>
#include <vector>

#include "tbp/geometry.hpp"
#include "tbp/upsample.hpp"

namespace tbp {

// Second-order expansion terms entering the error weights. Contractions are
// spelled out in matrix form here; an independent index-loop oracle checks
// them in the test suite.
struct ErrorWeightTerms {
  double delta_m = 0.0;
  double delta_i = 0.0;
  bool degenerate = false;  // denominator within 1e-12 of zero
};

// Requires entry.hessian; vartheta = theta - theta_i.
ErrorWeightTerms error_weight_terms(const BaseChainEntry& entry, const Vec& beta_star,
                                    const Vec& vartheta);

// Delta_w = Delta_M / (Delta_M + (1+c)(1 - Delta_I)) * w. Returns NaN and
// sets *degenerate when the denominator vanishes.
double error_weight(const BaseChainEntry& entry, const Vec& beta_star, const Vec& vartheta,
                    double w, bool* degenerate = nullptr);

// Per-sample error weights for an upsampled set. Boundary-replaced samples
// and flagged entries carry Delta_w = 0 (high-compactness limit).
std::vector<double> error_weights_for_samples(const std::vector<BaseChainEntry>& base,
                                              const std::vector<WeightedSample>& samples,
                                              const Vec& beta_star);

struct ExpectationErrorReport {
  double e_tau_w = 0.0;   // self-normalized estimate of E_p[tau]
  double delta_e = 0.0;   // sample estimate of E_q[tau * Delta_w]
  long flagged = 0;       // samples excluded for degenerate denominators
};

ExpectationErrorReport expectation_error(const std::vector<WeightedSample>& samples,
                                         const std::vector<double>& error_weights,
                                         const std::function<double(const Vec&)>& tau);

// Priors for post hoc reweighting. Densities may be unnormalized.
struct PriorSpec {
  enum class Kind { uniform, gaussian, independent_1d };
  Kind kind = Kind::uniform;

  // gaussian
  Vec theta_hat;
  Mat sigma_hat;

  // independent_1d: per-coordinate density and quantile evaluators
  std::vector<std::function<double(double)>> densities;
  std::vector<std::function<double(double)>> quantiles;

  static PriorSpec uniform();
  static PriorSpec gaussian(Vec theta_hat, Mat sigma_hat);
  static PriorSpec independent(std::vector<std::function<double(double)>> densities,
                               std::vector<std::function<double(double)>> quantiles = {});

  double density(const Vec& theta) const;
};

// w_pi(theta_ij) = pi(theta_ij) w_ij / sum_ij pi(theta_ij) w_ij, normalized
// to sum 1. Throws DegeneratePrior when the prior vanishes on every sample.
std::vector<double> prior_reweight(const std::vector<WeightedSample>& samples,
                                   const PriorSpec& prior);

// Augmented map alpha^(theta) = alpha(theta) (+) theta into R^{d+s}, folding
// a Gaussian prior N(theta_hat, sigma_hat) into the ambient density.
struct AugmentedPair {
  ManifoldModel model;
  AmbientGaussian gaussian;
};
AugmentedPair augment_map(const ManifoldModel& model, const AmbientGaussian& gaussian,
                          const Vec& theta_hat, const Mat& sigma_hat);

}  // namespace tbp
