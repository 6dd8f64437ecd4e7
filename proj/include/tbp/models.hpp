#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tbp/compactness.hpp"
#include "tbp/geometry.hpp"
#include "tbp/manifold.hpp"

namespace tbp {

// A ready-to-run problem: embedding, ambient Gaussian, sampling region, and
// (for the 1D cases) the closed-form unnormalized target density used by the
// quadrature reference histograms.
struct ExampleSetup {
  std::string name;
  ManifoldModel model;
  AmbientGaussian gaussian;
  SamplingRegion region;
  std::function<double(double)> density_1d;  // null when s > 1
};

// alpha(x) = (x, x^2), beta_* = (1, 2), region [-3, 3].
ExampleSetup parabola();

// Variable-size Klein bottle embedding into R^5, rotated by a seeded
// orthogonal matrix; region [2,8] x [0,2pi] x [0,2pi].
ExampleSetup klein(std::uint64_t rotation_seed = 12);

// alpha(xi) = (sqrt(xi^4 - 3 xi^2 - 2 xi + 5), 0): same target density as the
// parabola but with a flat image and a metric that vanishes at three points.
ExampleSetup reparabola();

// Exponential-family embedding of the beta(a, b) density with ambient
// signature (-1, +1, +1); region [delta, 1-delta].
ExampleSetup beta_example(double a, double b, double delta = 1e-6);

// Seeded random smooth embedding alpha(theta) = A theta + sum_k b_k
// sin(w_k . theta + phi_k) for high-dimensional exercises; amplitude 0 gives
// an affine map. Region [-1, 1]^s, beta_* = alpha(centroid).
ExampleSetup synthetic_highd(Eigen::Index s = 2, Eigen::Index d = 170, std::uint64_t seed = 11,
                             double amplitude = 0.3, int n_waves = 6);

std::vector<std::string> example_names();

}  // namespace tbp
