#include "tbp/diagnostics.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "tbp/errors.hpp"

namespace tbp {

ErrorWeightTerms error_weight_terms(const BaseChainEntry& entry, const Vec& beta_star,
                                    const Vec& vartheta) {
  if (!entry.hessian) throw NotAvailable("error weights need the Hessian at the base point");
  const Eigen::Index s = entry.theta.size();
  const Mat& jac = entry.jacobian;
  const HessianTensor& hess = *entry.hessian;
  const Mat& gamma = entry.geometry.metric;  // whitened Fisher matrix

  const Vec alpha_star = entry.alpha - beta_star;

  // aH(mu,mu') = alpha_*^nu H^nu_{mu mu'}; pH likewise with P_perp alpha_*.
  // Both are symmetric because H is symmetric in its lower indices.
  const Eigen::RowVectorXd a_hess_flat = alpha_star.transpose() * hess;
  const Eigen::Map<const Mat> a_hess(a_hess_flat.data(), s, s);
  const Vec jta = jac.transpose() * alpha_star;
  const auto gamma_ldlt = gamma.ldlt();
  const Vec g = gamma_ldlt.solve(jta);
  const Vec proj_alpha = jac * g;  // P_perp alpha_*
  const Eigen::RowVectorXd p_hess_flat = proj_alpha.transpose() * hess;
  const Eigen::Map<const Mat> p_hess(p_hess_flat.data(), s, s);

  const Vec b = a_hess * vartheta;
  const double t1 = g.dot(b);
  const double t2 = 1.5 * vartheta.dot(p_hess * vartheta);
  const double t3 = 0.5 * b.dot(gamma_ldlt.solve(b));
  const double t4 = vartheta.dot(a_hess * vartheta);

  ErrorWeightTerms terms;
  terms.delta_m = t1 + t2 + t3 + t4;
  terms.delta_i = 0.5 * t4;
  const double denom = terms.delta_m + (1.0 + entry.c) * (1.0 - terms.delta_i);
  terms.degenerate = std::abs(denom) < 1e-12;
  return terms;
}

double error_weight(const BaseChainEntry& entry, const Vec& beta_star, const Vec& vartheta,
                    double w, bool* degenerate) {
  const ErrorWeightTerms terms = error_weight_terms(entry, beta_star, vartheta);
  if (degenerate != nullptr) *degenerate = terms.degenerate;
  if (terms.degenerate) return std::numeric_limits<double>::quiet_NaN();
  const double denom = terms.delta_m + (1.0 + entry.c) * (1.0 - terms.delta_i);
  return terms.delta_m / denom * w;
}

std::vector<double> error_weights_for_samples(const std::vector<BaseChainEntry>& base,
                                              const std::vector<WeightedSample>& samples,
                                              const Vec& beta_star) {
  std::vector<double> out(samples.size(), 0.0);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const WeightedSample& smp = samples[k];
    const BaseChainEntry& entry = base.at(smp.base_index);
    if (smp.boundary_replaced || entry.flagged) continue;  // c -> inf semantics
    out[k] = error_weight(entry, beta_star, smp.theta - entry.theta, smp.w);
  }
  return out;
}

ExpectationErrorReport expectation_error(const std::vector<WeightedSample>& samples,
                                         const std::vector<double>& error_weights,
                                         const std::function<double(const Vec&)>& tau) {
  if (samples.size() != error_weights.size())
    throw InvalidInput("samples and error weights must be aligned");
  ExpectationErrorReport rep;
  double sum_w = 0.0, sum_tw = 0.0, sum_tdw = 0.0;
  long valid = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double t = tau(samples[k].theta);
    sum_w += samples[k].w;
    sum_tw += t * samples[k].w;
    if (std::isfinite(error_weights[k])) {
      sum_tdw += t * error_weights[k];
      ++valid;
    } else {
      ++rep.flagged;
    }
  }
  if (!(sum_w > 0)) throw NumericError("expectation_error: total weight is not positive");
  rep.e_tau_w = sum_tw / sum_w;
  rep.delta_e = valid ? sum_tdw / double(valid) : 0.0;
  return rep;
}

PriorSpec PriorSpec::uniform() { return PriorSpec{}; }

PriorSpec PriorSpec::gaussian(Vec theta_hat, Mat sigma_hat) {
  PriorSpec p;
  p.kind = Kind::gaussian;
  p.theta_hat = std::move(theta_hat);
  p.sigma_hat = std::move(sigma_hat);
  Eigen::LLT<Mat> llt(p.sigma_hat);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("gaussian prior covariance must be positive-definite");
  return p;
}

PriorSpec PriorSpec::independent(std::vector<std::function<double(double)>> densities,
                                 std::vector<std::function<double(double)>> quantiles) {
  PriorSpec p;
  p.kind = Kind::independent_1d;
  p.densities = std::move(densities);
  p.quantiles = std::move(quantiles);
  if (p.densities.empty()) throw InvalidInput("independent prior needs density evaluators");
  return p;
}

double PriorSpec::density(const Vec& theta) const {
  switch (kind) {
    case Kind::uniform:
      return 1.0;
    case Kind::gaussian: {
      const Vec diff = theta - theta_hat;
      return std::exp(-0.5 * diff.dot(sigma_hat.llt().solve(diff)));
    }
    case Kind::independent_1d: {
      if (std::size_t(theta.size()) != densities.size())
        throw InvalidInput("prior dimension mismatch");
      double p = 1.0;
      for (Eigen::Index k = 0; k < theta.size(); ++k) p *= densities[k](theta[k]);
      return p;
    }
  }
  return 0.0;
}

std::vector<double> prior_reweight(const std::vector<WeightedSample>& samples,
                                   const PriorSpec& prior) {
  if (samples.empty()) throw InvalidInput("prior_reweight requires samples");
  std::vector<double> out(samples.size());
  double total = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double p = prior.density(samples[k].theta);
    if (!(p >= 0) || !std::isfinite(p)) throw NumericError("prior density must be finite and >= 0");
    out[k] = p * samples[k].w;
    total += out[k];
  }
  if (!(total > 0))
    throw DegeneratePrior("prior vanishes on every weighted sample");
  for (double& w : out) w /= total;
  return out;
}

AugmentedPair augment_map(const ManifoldModel& model, const AmbientGaussian& gaussian,
                          const Vec& theta_hat, const Mat& sigma_hat) {
  const Eigen::Index s = model.s();
  const Eigen::Index d = model.d();
  if (theta_hat.size() != s || sigma_hat.rows() != s || sigma_hat.cols() != s)
    throw InvalidInput("augment_map prior shape mismatch");

  ManifoldModel::MapFn base_map = [m = model, d, s](const Vec& theta) -> Vec {
    Vec out(d + s);
    out.head(d) = m.map(theta);
    out.tail(s) = theta;
    return out;
  };
  ManifoldModel::JacobianFn base_jac = [m = model, d, s](const Vec& theta) -> Mat {
    Mat out = Mat::Zero(d + s, s);
    out.topRows(d) = m.jacobian(theta);
    out.bottomRows(s) = Mat::Identity(s, s);
    return out;
  };
  ManifoldModel::HessianFn base_hess;
  if (model.has_hessian()) {
    base_hess = [m = model, d, s](const Vec& theta) -> HessianTensor {
      HessianTensor out = HessianTensor::Zero(d + s, s * s);
      out.topRows(d) = m.hessian(theta);
      return out;
    };
  }
  Vec signature(d + s);
  signature.head(d) = model.signature();
  signature.tail(s) = Vec::Ones(s);

  Vec beta_hat(d + s);
  beta_hat.head(d) = gaussian.beta_star;
  beta_hat.tail(s) = theta_hat;
  Mat sigma_big = Mat::Zero(d + s, d + s);
  sigma_big.topLeftCorner(d, d) = gaussian.sigma;
  sigma_big.bottomRightCorner(s, s) = sigma_hat;

  return AugmentedPair{
      ManifoldModel(s, d + s, std::move(base_map), std::move(base_jac), std::move(base_hess),
                    std::move(signature)),
      AmbientGaussian::make(std::move(beta_hat), std::move(sigma_big))};
}

}  // namespace tbp
