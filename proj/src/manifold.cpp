#include "tbp/manifold.hpp"

#include "tbp/errors.hpp"

namespace tbp {

ManifoldModel::ManifoldModel(Eigen::Index s, Eigen::Index d, MapFn map, JacobianFn jacobian,
                             HessianFn hessian, Vec signature)
    : s_(s),
      d_(d),
      map_(std::move(map)),
      jacobian_(std::move(jacobian)),
      hessian_(std::move(hessian)),
      signature_(std::move(signature)),
      has_analytic_jacobian_(bool(jacobian_)),
      counters_(std::make_shared<CallCounters>()) {
  if (s_ < 1 || d_ <= s_) throw InvalidInput("manifold model requires d > s >= 1");
  if (!map_) throw InvalidInput("manifold model requires a map evaluator");
  if (signature_.size() == 0) signature_ = Vec::Ones(d_);
  if (signature_.size() != d_) throw InvalidInput("signature length must equal d");
  trivial_signature_ = (signature_.array() == 1.0).all();
  if (!trivial_signature_ && !(signature_.array().abs() == 1.0).all())
    throw InvalidInput("signature entries must be +1 or -1");
}

Vec ManifoldModel::map(const Vec& theta) const {
  counters_->map_calls.fetch_add(1, std::memory_order_relaxed);
  return map_(theta);
}

Mat ManifoldModel::jacobian(const Vec& theta) const {
  counters_->jacobian_calls.fetch_add(1, std::memory_order_relaxed);
  if (jacobian_) return jacobian_(theta);
  return fd::jacobian(map_, theta, d_);
}

HessianTensor ManifoldModel::hessian(const Vec& theta) const {
  if (!hessian_) throw NotAvailable("model has no Hessian evaluator");
  counters_->hessian_calls.fetch_add(1, std::memory_order_relaxed);
  return hessian_(theta);
}

ManifoldModel ManifoldModel::linearly_transformed(const Mat& w, const Vec& shift) const {
  MapFn map = map_;
  JacobianFn jac = jacobian_;
  HessianFn hess = hessian_;
  const bool identity_w = w.isIdentity(0.0);
  MapFn new_map;
  if (identity_w)
    new_map = [map, shift](const Vec& theta) -> Vec { return map(theta) - shift; };
  else
    new_map = [map, w, shift](const Vec& theta) -> Vec { return w * (map(theta) - shift); };
  JacobianFn new_jac = jac;
  if (jac && !identity_w) new_jac = [jac, w](const Vec& theta) -> Mat { return w * jac(theta); };
  HessianFn new_hess = hess;
  if (hess && !identity_w)
    new_hess = [hess, w](const Vec& theta) -> HessianTensor { return w * hess(theta); };
  ManifoldModel out(s_, d_, std::move(new_map), std::move(new_jac), std::move(new_hess), signature_);
  return out;
}

ManifoldModel ManifoldModel::with_finite_difference_derivatives(bool add_hessian) const {
  MapFn map = map_;
  const Eigen::Index d = d_;
  JacobianFn jac = jacobian_;
  if (!jac) jac = [map, d](const Vec& theta) -> Mat { return fd::jacobian(map, theta, d); };
  HessianFn hess = hessian_;
  if (!hess && add_hessian) {
    JacobianFn jac_for_h = jac;
    hess = [jac_for_h, d](const Vec& theta) -> HessianTensor {
      return fd::hessian_from_jacobian(jac_for_h, theta, d);
    };
  }
  return ManifoldModel(s_, d_, map_, std::move(jac), std::move(hess), signature_);
}

namespace fd {

Mat jacobian(const ManifoldModel::MapFn& map, const Vec& theta, Eigen::Index d, double rel_step) {
  const Eigen::Index s = theta.size();
  Mat j(d, s);
  Vec t = theta;
  for (Eigen::Index mu = 0; mu < s; ++mu) {
    const double h = rel_step * (1.0 + std::abs(theta[mu]));
    t[mu] = theta[mu] + h;
    const Vec fp = map(t);
    t[mu] = theta[mu] - h;
    const Vec fm = map(t);
    t[mu] = theta[mu];
    j.col(mu) = (fp - fm) / (2.0 * h);
  }
  return j;
}

HessianTensor hessian_from_jacobian(const ManifoldModel::JacobianFn& jac, const Vec& theta,
                                    Eigen::Index d, double rel_step) {
  const Eigen::Index s = theta.size();
  HessianTensor h(d, s * s);
  Vec t = theta;
  for (Eigen::Index mup = 0; mup < s; ++mup) {
    const double step = rel_step * (1.0 + std::abs(theta[mup]));
    t[mup] = theta[mup] + step;
    const Mat jp = jac(t);
    t[mup] = theta[mup] - step;
    const Mat jm = jac(t);
    t[mup] = theta[mup];
    const Mat diff = (jp - jm) / (2.0 * step);
    for (Eigen::Index mu = 0; mu < s; ++mu) h.col(hessian_col(s, mu, mup)) = diff.col(mu);
  }
  // Enforce the lower-index symmetry that central differences only satisfy
  // approximately.
  for (Eigen::Index mu = 0; mu < s; ++mu)
    for (Eigen::Index mup = mu + 1; mup < s; ++mup) {
      const Vec avg = 0.5 * (h.col(hessian_col(s, mu, mup)) + h.col(hessian_col(s, mup, mu)));
      h.col(hessian_col(s, mu, mup)) = avg;
      h.col(hessian_col(s, mup, mu)) = avg;
    }
  return h;
}

}  // namespace fd

}  // namespace tbp
