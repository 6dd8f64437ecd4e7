#pragma once

// Shared oracles for the test suite. These deliberately avoid the production
// code paths they are used to check: derivatives come from their own stencil,
// matrix contractions from explicit loops.

#include <functional>

#include "tbp/manifold.hpp"
#include "tbp/rng.hpp"
#include "tbp/types.hpp"

namespace tbp::testutil {

// Independent central-difference Jacobian (fixed absolute-ish step, distinct
// from the production fallback).
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& theta,
                       double h = 1e-6) {
  Vec t = theta;
  const Eigen::Index s = theta.size();
  t[0] = theta[0];
  const Eigen::Index d = map(theta).size();
  Mat j(d, s);
  for (Eigen::Index mu = 0; mu < s; ++mu) {
    t[mu] = theta[mu] + h;
    const Vec fp = map(t);
    t[mu] = theta[mu] - h;
    const Vec fm = map(t);
    t[mu] = theta[mu];
    j.col(mu) = (fp - fm) / (2 * h);
  }
  return j;
}

inline HessianTensor fd_hessian(const std::function<Vec(const Vec&)>& map, const Vec& theta,
                                double h = 1e-4) {
  const Eigen::Index s = theta.size();
  const Eigen::Index d = map(theta).size();
  HessianTensor out(d, s * s);
  Vec t = theta;
  for (Eigen::Index a = 0; a < s; ++a)
    for (Eigen::Index b = 0; b < s; ++b) {
      Vec acc;
      if (a == b) {
        t = theta;
        t[a] += h;
        const Vec fpp = map(t);
        t[a] -= 2 * h;
        const Vec fmm = map(t);
        acc = (fpp - 2 * map(theta) + fmm) / (h * h);
      } else {
        t = theta;
        t[a] += h;
        t[b] += h;
        const Vec fpp = map(t);
        t[b] -= 2 * h;
        const Vec fpm = map(t);
        t[a] -= 2 * h;
        const Vec fmm = map(t);
        t[b] += 2 * h;
        const Vec fmp = map(t);
        acc = (fpp - fpm - fmp + fmm) / (4 * h * h);
      }
      out.col(hessian_col(s, a, b)) = acc;
    }
  return out;
}

inline Mat random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vec random_vector(Rng& rng, Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline Mat random_spd(Rng& rng, Eigen::Index n) {
  const Mat a = random_matrix(rng, n, n);
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

// Uniform point inside a box, optionally inset from the boundary by a
// fraction of each side (finite-difference stencils must stay inside the
// domain of definition).
inline Vec random_point_in_box(Rng& rng, const Vec& lo, const Vec& hi, double inset_frac = 0.0) {
  Vec out(lo.size());
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    const double pad = inset_frac * (hi[k] - lo[k]);
    out[k] = lo[k] + pad + (hi[k] - lo[k] - 2 * pad) * rng.uniform();
  }
  return out;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

inline double matrix_rel_err(const Mat& got, const Mat& want) {
  const double scale = std::max(1e-12, want.norm());
  return (got - want).norm() / scale;
}

}  // namespace tbp::testutil
