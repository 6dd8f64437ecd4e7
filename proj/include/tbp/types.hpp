#pragma once

#include <Eigen/Core>

namespace tbp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Second-derivative tensor H^nu_{mu mu'} of an embedding map, stored as a
// d x (s*s) matrix whose column mu*s+mu' holds the ambient vector of second
// partials. Symmetric in (mu, mu').
using HessianTensor = Eigen::MatrixXd;

inline Eigen::Index hessian_col(Eigen::Index s, Eigen::Index mu, Eigen::Index mup) {
  return mu * s + mup;
}

}  // namespace tbp
