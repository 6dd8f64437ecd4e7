#pragma once

#include <atomic>
#include <functional>
#include <memory>

#include "tbp/types.hpp"

namespace tbp {

// Running tally of evaluator calls, shared by copies of a model. The
// upsampling stage is supposed to get by on n map and n Jacobian calls; the
// counters make that auditable.
struct CallCounters {
  std::atomic<long> map_calls{0};
  std::atomic<long> jacobian_calls{0};
  std::atomic<long> hessian_calls{0};
  void reset() {
    map_calls = 0;
    jacobian_calls = 0;
    hessian_calls = 0;
  }
};

// A smooth embedding theta in R^s -> alpha(theta) in R^d together with its
// derivative evaluators. The optional signature (+/-1 per ambient component)
// turns Euclidean inner products into diagonal-signature ones; everything
// else treats it as all +1.
class ManifoldModel {
 public:
  using MapFn = std::function<Vec(const Vec&)>;
  using JacobianFn = std::function<Mat(const Vec&)>;
  using HessianFn = std::function<HessianTensor(const Vec&)>;

  ManifoldModel(Eigen::Index s, Eigen::Index d, MapFn map, JacobianFn jacobian = nullptr,
                HessianFn hessian = nullptr, Vec signature = Vec());

  Eigen::Index s() const { return s_; }
  Eigen::Index d() const { return d_; }
  bool has_analytic_jacobian() const { return has_analytic_jacobian_; }
  bool has_hessian() const { return bool(hessian_); }
  const Vec& signature() const { return signature_; }
  bool trivial_signature() const { return trivial_signature_; }

  Vec map(const Vec& theta) const;
  Mat jacobian(const Vec& theta) const;
  HessianTensor hessian(const Vec& theta) const;  // throws NotAvailable if absent

  // Model with the same derivatives but map' = W*(map - shift).
  ManifoldModel linearly_transformed(const Mat& w, const Vec& shift) const;

  // Model whose missing jacobian (and, if requested, hessian) evaluators are
  // replaced by central finite differences of the map with per-coordinate
  // step 1e-5*(1+|theta_mu|).
  ManifoldModel with_finite_difference_derivatives(bool add_hessian = false) const;

  CallCounters& counters() const { return *counters_; }

 private:
  Eigen::Index s_;
  Eigen::Index d_;
  MapFn map_;
  JacobianFn jacobian_;
  HessianFn hessian_;
  Vec signature_;
  bool trivial_signature_;
  bool has_analytic_jacobian_;
  std::shared_ptr<CallCounters> counters_;
};

namespace fd {
// Central-difference derivative helpers; also used by test oracles with
// custom steps.
Mat jacobian(const ManifoldModel::MapFn& map, const Vec& theta, Eigen::Index d,
             double rel_step = 1e-5);
HessianTensor hessian_from_jacobian(const ManifoldModel::JacobianFn& jac, const Vec& theta,
                                    Eigen::Index d, double rel_step = 1e-5);
}  // namespace fd

}  // namespace tbp
