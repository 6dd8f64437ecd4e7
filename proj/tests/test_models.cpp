#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "tbp/chain.hpp"
#include "tbp/models.hpp"
#include "tbp/rng.hpp"
#include "test_util.hpp"

using namespace tbp;
using testutil::matrix_rel_err;

namespace {

// Central-stencil validation of a model's analytic derivatives at random
// points. Points are kept 2% clear of each boundary so the stencils stay
// inside the map's domain.
void validate_derivatives(const ExampleSetup& ex, int points, std::uint64_t seed,
                          double jac_tol = 1e-5, double hess_tol = 1e-4) {
  Rng rng(seed);
  auto map = [&ex](const Vec& t) { return ex.model.map(t); };
  for (int i = 0; i < points; ++i) {
    const Vec t = testutil::random_point_in_box(rng, ex.region.lower, ex.region.upper, 0.02);
    const Mat j_fd = testutil::fd_jacobian(map, t);
    CHECK(matrix_rel_err(ex.model.jacobian(t), j_fd) < jac_tol);
    if (ex.model.has_hessian()) {
      const HessianTensor h_fd = testutil::fd_hessian(map, t);
      const HessianTensor h = ex.model.hessian(t);
      CHECK(matrix_rel_err(h, h_fd) < hess_tol);
      // Lower-index symmetry.
      const Eigen::Index s = ex.model.s();
      for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = a + 1; b < s; ++b)
          CHECK((h.col(hessian_col(s, a, b)) - h.col(hessian_col(s, b, a))).norm() < 1e-12);
    }
  }
}

double parabola_exponent(double x) { return std::pow(x, 4) - 3 * x * x - 2 * x + 5; }

}  // namespace

TEST_SUITE("models") {

TEST_CASE("derivative validation across all built-ins") {
  validate_derivatives(parabola(), 100, 1);
  validate_derivatives(klein(), 100, 2);
  validate_derivatives(reparabola(), 100, 3);
  validate_derivatives(beta_example(0.8, 0.8), 100, 4);
  validate_derivatives(beta_example(2, 4), 100, 5);
  validate_derivatives(synthetic_highd(2, 60, 7, 0.3, 6), 50, 6);
}

TEST_CASE("parabola density and curvature") {
  const ExampleSetup ex = parabola();
  // p(x) from the composed model equals the closed form.
  const TargetDensity target(ex.model, ex.gaussian, ex.region);
  for (double x = -2.9; x < 3.0; x += 0.37) {
    CHECK(target.log_density(Vec::Constant(1, x)) ==
          doctest::Approx(-0.5 * parabola_exponent(x)).epsilon(1e-12));
    CHECK(ex.density_1d(x) == doctest::Approx(std::exp(-0.5 * parabola_exponent(x))));
  }
}

TEST_CASE("parabola stationary points satisfy the tangency condition") {
  const ExampleSetup ex = parabola();
  // Bisection oracle on d/dx log p = -(2x^3 - 3x - 1); three sign changes.
  auto dlogp = [](double x) { return -(4 * std::pow(x, 3) - 6 * x - 2) / 2.0; };
  std::vector<double> roots;
  double prev_x = -3.0, prev_f = dlogp(prev_x);
  for (double x = -3.0 + 1e-3; x <= 3.0; x += 1e-3) {
    const double f = dlogp(x);
    if (prev_f == 0.0 || (prev_f < 0) != (f < 0)) {
      double a = prev_x, b = x;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b);
        if ((dlogp(a) < 0) != (dlogp(mid) < 0))
          b = mid;
        else
          a = mid;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_f = f;
  }
  REQUIRE(roots.size() == 3);
  // Expected locations: -1, (1 - sqrt(3))/2, (1 + sqrt(3))/2.
  CHECK(roots[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(roots[1] == doctest::Approx((1 - std::sqrt(3.0)) / 2).epsilon(1e-6));
  CHECK(roots[2] == doctest::Approx((1 + std::sqrt(3.0)) / 2).epsilon(1e-6));
  // At each root, J^T (alpha - beta_star) = 0.
  for (double r : roots) {
    const Vec t = Vec::Constant(1, r);
    const Mat j = ex.model.jacobian(t);
    const Vec resid = j.transpose() * (ex.model.map(t) - ex.gaussian.beta_star);
    CHECK(std::abs(resid[0]) < 1e-5);
  }
}

TEST_CASE("klein chart and rotation") {
  const ExampleSetup ex = klein(12);
  // Re-derive the chart here as the oracle; last component vanishes before
  // rotation and the rotation preserves norms and distances.
  auto chart = [](const Vec& t) -> Vec {
    const double r = t[0], psi = t[1], phi = t[2];
    Vec a(5);
    a << 0.5 * (1 + r * std::cos(psi)) * std::cos(phi),
        0.5 * (1 + r * std::cos(psi)) * std::sin(phi),
        0.5 * r * std::sin(psi) * std::cos(phi / 2), 0.5 * r * std::sin(psi) * std::sin(phi / 2),
        0.0;
    return a;
  };
  Rng rng(3);
  Vec prev = testutil::random_point_in_box(rng, ex.region.lower, ex.region.upper);
  for (int i = 0; i < 25; ++i) {
    const Vec t = testutil::random_point_in_box(rng, ex.region.lower, ex.region.upper);
    CHECK(chart(t)[4] == 0.0);
    CHECK(ex.model.map(t).norm() == doctest::Approx(chart(t).norm()).epsilon(1e-12));
    CHECK((ex.model.map(t) - ex.model.map(prev)).norm() ==
          doctest::Approx((chart(t) - chart(prev)).norm()).epsilon(1e-12));
    prev = t;
  }
  // beta_star sits on the manifold at the anchor parameters.
  Vec anchor(3);
  anchor << 3.0, M_PI / 4, M_PI / 2;
  CHECK((ex.gaussian.beta_star - ex.model.map(anchor)).norm() < 1e-14);
  // Different rotation seeds give different embeddings but identical
  // densities (the rotation cancels in |alpha - beta_star|).
  const ExampleSetup ex2 = klein(99);
  const TargetDensity t1(ex.model, ex.gaussian, ex.region);
  const TargetDensity t2(ex2.model, ex2.gaussian, ex2.region);
  for (int i = 0; i < 10; ++i) {
    const Vec t = testutil::random_point_in_box(rng, ex.region.lower, ex.region.upper);
    CHECK(t1.log_density(t) == doctest::Approx(t2.log_density(t)).epsilon(1e-10));
    CHECK((ex.model.map(t) - ex2.model.map(t)).norm() > 1e-3);
  }
}

TEST_CASE("klein second fundamental form has rank two") {
  const ExampleSetup ex = klein(12);
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const Vec t = testutil::random_point_in_box(rng, ex.region.lower, ex.region.upper, 0.05);
    const GeometryAtPoint g = geometry_at(ex.model, t);
    REQUIRE(g.second_form.has_value());
    Eigen::SelfAdjointEigenSolver<Mat> es(*g.second_form, Eigen::EigenvaluesOnly);
    const Vec abs_eigs = es.eigenvalues().cwiseAbs();
    std::vector<double> sorted(abs_eigs.data(), abs_eigs.data() + 3);
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted[0] < 1e-10 * sorted[2]);
    CHECK(sorted[1] > 1e-6);
  }
}

TEST_CASE("reparabola matches the parabola density with a flat image") {
  const ExampleSetup re = reparabola();
  const ExampleSetup pa = parabola();
  const TargetDensity t_re(re.model, re.gaussian, re.region);
  const TargetDensity t_pa(pa.model, pa.gaussian, pa.region);
  for (double x = -3.0; x <= 3.0; x += 0.01) {
    const Vec t = Vec::Constant(1, x);
    CHECK(std::abs(t_re.log_density(t) - t_pa.log_density(t)) < 1e-12);
  }
  // Image is a ray on the first axis.
  CHECK(re.model.map(Vec::Constant(1, 1.3))[1] == 0.0);

  // F_I = (2x^3 - 3x - 1)^2 / alpha1^2, vanishing at -1 and (1 +- sqrt3)/2.
  for (double x : {-2.0, -0.4, 0.9, 2.5}) {
    const Vec t = Vec::Constant(1, x);
    const Mat j = re.model.jacobian(t);
    const double a1sq = parabola_exponent(x);
    const double num = 2 * std::pow(x, 3) - 3 * x - 1;
    CHECK(pullback_metric(j, Vec::Ones(2))(0, 0) ==
          doctest::Approx(num * num / a1sq).epsilon(1e-12));
  }
  for (double xs : {-1.0, (1 - std::sqrt(3.0)) / 2, (1 + std::sqrt(3.0)) / 2}) {
    const Mat j = re.model.jacobian(Vec::Constant(1, xs));
    CHECK(std::abs(pullback_metric(j, Vec::Ones(2))(0, 0)) < 1e-12);
  }

  // Minimum of alpha1 over the region: sqrt(11 - 6 sqrt3) / 2.
  double min_a1 = std::numeric_limits<double>::infinity();
  for (double x = -3.0; x <= 3.0; x += 1e-5)
    min_a1 = std::min(min_a1, re.model.map(Vec::Constant(1, x))[0]);
  CHECK(min_a1 == doctest::Approx(0.5 * std::sqrt(11 - 6 * std::sqrt(3.0))).epsilon(1e-6));
}

TEST_CASE("beta embedding reproduces the beta density") {
  for (auto [a, b] : {std::pair{0.8, 0.8}, std::pair{2.0, 4.0}}) {
    const ExampleSetup ex = beta_example(a, b);
    const TargetDensity target(ex.model, ex.gaussian, ex.region);
    // Signature-weighted log density equals (a-1) ln x + (b-1) ln(1-x); the
    // constant offset is zero for this embedding.
    for (double x = 0.05; x < 1.0; x += 0.05) {
      const double want = (a - 1) * std::log(x) + (b - 1) * std::log(1 - x);
      CHECK(target.log_density(Vec::Constant(1, x)) == doctest::Approx(want).epsilon(1e-10));
    }
  }
  // Symmetry for (0.8, 0.8).
  const ExampleSetup sym = beta_example(0.8, 0.8);
  for (double x : {0.1, 0.25, 0.4}) CHECK(sym.density_1d(x) == doctest::Approx(sym.density_1d(1 - x)));

  // Mode of beta(2, 4) at (a-1)/(a+b-2) = 1/4.
  const ExampleSetup b24 = beta_example(2, 4);
  double best_x = 0, best_p = -1;
  for (double x = 0.001; x < 1.0; x += 0.001) {
    const double p = b24.density_1d(x);
    if (p > best_p) {
      best_p = p;
      best_x = x;
    }
  }
  CHECK(best_x == doctest::Approx(0.25).epsilon(0.01));

  CHECK_THROWS_AS(beta_example(-1, 2), InvalidInput);
}

TEST_CASE("synthetic model: affine limit and bounded geometry variation") {
  // Zero amplitude: constant jacobian.
  const ExampleSetup affine = synthetic_highd(2, 60, 3, 0.0, 6);
  const Mat j0 = affine.model.jacobian(Vec::Zero(2));
  const Mat j1 = affine.model.jacobian(Vec::Constant(2, 0.7));
  CHECK(matrix_rel_err(j0, j1) < 1e-14);
  CHECK(affine.model.hessian(Vec::Zero(2)).norm() == 0.0);
  // beta_star is the centroid image.
  CHECK((affine.gaussian.beta_star - affine.model.map(affine.region.centroid())).norm() == 0.0);

  // Default amplitudes keep lambda^2 and kappa within a decade over the region.
  const ExampleSetup ex = synthetic_highd(2, 170, 11, 0.3, 6);
  Rng rng(8);
  double lam_min = 1e300, lam_max = 0, kap_min = 1e300, kap_max = 0;
  for (int i = 0; i < 40; ++i) {
    const Vec t = testutil::random_point_in_box(rng, ex.region.lower, ex.region.upper);
    const GeometryAtPoint g = geometry_at(ex.model, t);
    const double lam2 = region_scale(g.pseudoinverse, ex.region);
    lam_min = std::min(lam_min, lam2);
    lam_max = std::max(lam_max, lam2);
    REQUIRE(g.kappa.has_value());
    kap_min = std::min(kap_min, *g.kappa);
    kap_max = std::max(kap_max, *g.kappa);
  }
  CHECK(lam_max / lam_min < 10.0);
  CHECK(kap_max / kap_min < 10.0);
}

}  // TEST_SUITE
