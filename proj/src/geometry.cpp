#include "tbp/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tbp/errors.hpp"

namespace tbp {

AmbientGaussian AmbientGaussian::standard(Eigen::Index d) {
  AmbientGaussian g;
  g.beta_star = Vec::Zero(d);
  g.sigma = Mat::Identity(d, d);
  g.whitener = Mat::Identity(d, d);
  g.sigma_min_sq = 1.0;
  return g;
}

AmbientGaussian AmbientGaussian::make(Vec beta_star, Mat sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != beta_star.size())
    throw InvalidInput("ambient covariance shape mismatch");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw InvalidInput("ambient covariance must be symmetric");
  AmbientGaussian g;
  g.beta_star = std::move(beta_star);
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw NumericError("ambient covariance is not positive-definite");
  g.sigma = std::move(sigma);
  // W = L^{-1} with Sigma = L L^T, so W^T W = Sigma^{-1}.
  g.whitener = llt.matrixL().solve(Mat::Identity(g.sigma.rows(), g.sigma.cols()));
  Eigen::SelfAdjointEigenSolver<Mat> es(g.sigma, Eigen::EigenvaluesOnly);
  g.sigma_min_sq = es.eigenvalues().minCoeff();
  if (!(g.sigma_min_sq > 0)) throw NumericError("ambient covariance has a non-positive eigenvalue");
  return g;
}

bool AmbientGaussian::is_whitened() const {
  return beta_star.isZero(0.0) && sigma.isIdentity(1e-12);
}

Mat pullback_metric(const Mat& jacobian, const Vec& signature) {
  if (!jacobian.allFinite()) throw InvalidInput("jacobian has non-finite entries");
  if (signature.size() != jacobian.rows()) throw InvalidInput("signature length must equal d");
  if ((signature.array() == 1.0).all()) return jacobian.transpose() * jacobian;
  return jacobian.transpose() * signature.asDiagonal() * jacobian;
}

namespace {

bool metric_is_singular(const Mat& metric) {
  Eigen::SelfAdjointEigenSolver<Mat> es(metric, Eigen::EigenvaluesOnly);
  const double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
  if (max_abs == 0.0) return true;
  return es.eigenvalues().cwiseAbs().minCoeff() < kRankTol * max_abs;
}

}  // namespace

Mat pseudoinverse(const Mat& jacobian, const Mat& metric, const Vec& signature, const Vec& theta) {
  if (metric_is_singular(metric)) throw SingularMetric(theta);
  Mat jts = jacobian.transpose();
  if (!(signature.array() == 1.0).all()) jts = jts * signature.asDiagonal();
  return metric.ldlt().solve(jts);
}

Vec project_tangent(const Mat& jacobian, const Mat& pinv, const Vec& v) {
  if (pinv.cols() != v.size() || jacobian.rows() != v.size())
    throw InvalidInput("project_tangent shape mismatch");
  return jacobian * (pinv * v);
}

Mat second_fundamental_form(const Mat& jacobian, const Mat& pinv, const HessianTensor& hessian,
                            const Vec& signature) {
  const Eigen::Index s = jacobian.cols();
  if (hessian.cols() != s * s || hessian.rows() != jacobian.rows())
    throw InvalidInput("hessian tensor shape mismatch");
  const bool trivial = (signature.array() == 1.0).all();
  Mat form(s, s);
  for (Eigen::Index mu = 0; mu < s; ++mu)
    for (Eigen::Index mup = mu; mup < s; ++mup) {
      const Vec h = hessian.col(hessian_col(s, mu, mup));
      const Vec normal = h - jacobian * (pinv * h);
      double norm_sq;
      if (trivial)
        norm_sq = normal.squaredNorm();
      else
        norm_sq = std::abs((normal.array().square() * signature.array()).sum());
      form(mu, mup) = form(mup, mu) = std::sqrt(norm_sq);
    }
  return form;
}

double curvature_scale(const Mat& metric, const Mat& second_form, const Vec& theta) {
  if (metric_is_singular(metric)) throw SingularMetric(theta);
  Eigen::SelfAdjointEigenSolver<Mat> es(metric);
  // F_I^{-1} = U D U^T with D = 1/eigs; negative metric eigenvalues (diagonal
  // signature case) enter through their absolute values.
  const Vec d_inv_sqrt = es.eigenvalues().cwiseAbs().cwiseInverse().cwiseSqrt();
  const Mat q = es.eigenvectors() * d_inv_sqrt.asDiagonal();
  const Mat k = q.transpose() * second_form * q;
  Eigen::SelfAdjointEigenSolver<Mat> ek(k, Eigen::EigenvaluesOnly);
  return ek.eigenvalues().cwiseAbs().maxCoeff();
}

Mat fisher_matrix(const Mat& jacobian, const AmbientGaussian& gaussian) {
  if (jacobian.rows() != gaussian.d()) throw InvalidInput("fisher_matrix shape mismatch");
  const Mat wj = gaussian.whitener * jacobian;
  return wj.transpose() * wj;
}

WhitenedPair whiten(const ManifoldModel& model, const AmbientGaussian& gaussian) {
  if (model.d() != gaussian.d()) throw InvalidInput("model/gaussian dimension mismatch");
  WhitenedPair out{model.linearly_transformed(gaussian.whitener, gaussian.beta_star),
                   AmbientGaussian::standard(gaussian.d())};
  return out;
}

GeometryAtPoint geometry_at(const ManifoldModel& model, const Vec& theta) {
  const Vec alpha = model.map(theta);
  const Mat jac = model.jacobian(theta);
  if (model.has_hessian()) {
    const HessianTensor hess = model.hessian(theta);
    return geometry_at(model, theta, alpha, jac, &hess);
  }
  return geometry_at(model, theta, alpha, jac, nullptr);
}

GeometryAtPoint geometry_at(const ManifoldModel& model, const Vec& theta, const Vec& alpha,
                            const Mat& jacobian, const HessianTensor* hessian) {
  GeometryAtPoint g;
  g.theta = theta;
  g.alpha = alpha;
  g.jacobian = jacobian;
  g.metric = pullback_metric(jacobian, model.signature());
  try {
    g.pseudoinverse = pseudoinverse(jacobian, g.metric, model.signature(), theta);
  } catch (const SingularMetric&) {
    g.singular = true;
    g.pseudoinverse = Mat::Zero(model.s(), model.d());
  }
  g.pseudoinverse_t = g.pseudoinverse.transpose();
  if (hessian != nullptr && !g.singular) {
    g.second_form = second_fundamental_form(jacobian, g.pseudoinverse, *hessian, model.signature());
    g.kappa = curvature_scale(g.metric, *g.second_form, theta);
  }
  return g;
}

}  // namespace tbp
