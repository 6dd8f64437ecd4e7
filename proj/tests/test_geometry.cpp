#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "tbp/errors.hpp"
#include "tbp/geometry.hpp"
#include "tbp/models.hpp"
#include "tbp/rng.hpp"
#include "test_util.hpp"

using namespace tbp;
using testutil::matrix_rel_err;
using testutil::random_matrix;
using testutil::random_spd;
using testutil::random_vector;

namespace {

Mat parabola_jac(double x) {
  Mat j(2, 1);
  j << 1.0, 2.0 * x;
  return j;
}

const Vec kOnes2 = Vec::Ones(2);

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("pullback metric examples") {
  CHECK(pullback_metric(parabola_jac(0), kOnes2)(0, 0) == doctest::Approx(1.0));
  CHECK(pullback_metric(parabola_jac(1), kOnes2)(0, 0) == doctest::Approx(5.0));

  // Orthonormal columns give the identity.
  Rng rng(1);
  const Mat q = Eigen::HouseholderQR<Mat>(random_matrix(rng, 6, 3)).householderQ() *
                Mat::Identity(6, 3);
  CHECK(matrix_rel_err(pullback_metric(q, Vec::Ones(6)), Mat::Identity(3, 3)) < 1e-12);

  Mat bad = parabola_jac(0);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(pullback_metric(bad, kOnes2), InvalidInput);
}

TEST_CASE("pseudoinverse examples and defining property") {
  Rng rng(2);
  const Mat q = Eigen::HouseholderQR<Mat>(random_matrix(rng, 5, 2)).householderQ() *
                Mat::Identity(5, 2);
  const Mat qp = pseudoinverse(q, pullback_metric(q, Vec::Ones(5)), Vec::Ones(5));
  CHECK(matrix_rel_err(qp, q.transpose()) < 1e-12);

  const Mat j = parabola_jac(1);
  const Mat jp = pseudoinverse(j, pullback_metric(j, kOnes2), kOnes2);
  CHECK(jp(0, 0) == doctest::Approx(0.2));
  CHECK(jp(0, 1) == doctest::Approx(0.4));

  for (int trial = 0; trial < 20; ++trial) {
    const Mat a = random_matrix(rng, 7, 3);
    const Mat ap = pseudoinverse(a, pullback_metric(a, Vec::Ones(7)), Vec::Ones(7));
    CHECK(matrix_rel_err(ap * a, Mat::Identity(3, 3)) < 1e-8);
  }

  // Rank-deficient jacobian trips the rank test and reports the point.
  Mat degenerate = Mat::Zero(4, 2);
  degenerate.col(0) << 1, 0, 0, 0;
  degenerate.col(1) << 2, 0, 0, 0;
  Vec theta(2);
  theta << 0.5, -0.5;
  try {
    pseudoinverse(degenerate, pullback_metric(degenerate, Vec::Ones(4)), Vec::Ones(4), theta);
    FAIL("expected SingularMetric");
  } catch (const SingularMetric& e) {
    CHECK(e.theta == theta);
  }
}

TEST_CASE("tangent projection") {
  const Mat j = parabola_jac(0);
  const Mat jp = pseudoinverse(j, pullback_metric(j, kOnes2), kOnes2);
  Vec v(2);
  v << 0.5, 0.3;
  const Vec proj = project_tangent(j, jp, v);
  CHECK(proj[0] == doctest::Approx(0.5));
  CHECK(proj[1] == doctest::Approx(0.0));

  // Tangent vectors pass through; normal vectors vanish.
  Rng rng(3);
  const Mat a = random_matrix(rng, 6, 2);
  const Mat ap = pseudoinverse(a, pullback_metric(a, Vec::Ones(6)), Vec::Ones(6));
  const Vec u = random_vector(rng, 2);
  const Vec tangent = a * u;
  CHECK((project_tangent(a, ap, tangent) - tangent).norm() < 1e-10);
  Vec w = random_vector(rng, 6);
  const Vec normal = w - project_tangent(a, ap, w);
  CHECK(project_tangent(a, ap, normal).norm() < 1e-9);
}

TEST_CASE("projection operator is idempotent symmetric with trace s") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat a = random_matrix(rng, 8, 3);
    const Mat ap = pseudoinverse(a, pullback_metric(a, Vec::Ones(8)), Vec::Ones(8));
    const Mat p = a * ap;
    CHECK(matrix_rel_err(p * p, p) < 1e-8);
    CHECK(matrix_rel_err(p, p.transpose()) < 1e-8);
    CHECK(p.trace() == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(((Mat::Identity(8, 8) - p) * a).norm() < 1e-9);
  }
}

TEST_CASE("second fundamental form examples") {
  // Affine map: zero form.
  Rng rng(5);
  const Mat a = random_matrix(rng, 5, 2);
  const Mat ap = pseudoinverse(a, pullback_metric(a, Vec::Ones(5)), Vec::Ones(5));
  const HessianTensor h0 = HessianTensor::Zero(5, 4);
  CHECK(second_fundamental_form(a, ap, h0, Vec::Ones(5)).norm() == 0.0);

  // Parabola: H column (0, 2).
  HessianTensor hp(2, 1);
  hp << 0.0, 2.0;
  {
    const Mat j = parabola_jac(0);
    const Mat jp = pseudoinverse(j, pullback_metric(j, kOnes2), kOnes2);
    CHECK(second_fundamental_form(j, jp, hp, kOnes2)(0, 0) == doctest::Approx(2.0));
  }
  {
    const Mat j = parabola_jac(1);
    const Mat jp = pseudoinverse(j, pullback_metric(j, kOnes2), kOnes2);
    CHECK(second_fundamental_form(j, jp, hp, kOnes2)(0, 0) ==
          doctest::Approx(2.0 / std::sqrt(5.0)));
  }
}

TEST_CASE("curvature scale: parabola closed form, sphere, affine") {
  // kappa(x) = 2 / (1 + 4x^2)^(3/2) on a grid.
  HessianTensor hp(2, 1);
  hp << 0.0, 2.0;
  for (double x = -3.0; x <= 3.0; x += 0.1) {
    const Mat j = parabola_jac(x);
    const Mat fi = pullback_metric(j, kOnes2);
    const Mat jp = pseudoinverse(j, fi, kOnes2);
    const Mat fii = second_fundamental_form(j, jp, hp, kOnes2);
    const double want = 2.0 / std::pow(1.0 + 4 * x * x, 1.5);
    CHECK(curvature_scale(fi, fii) == doctest::Approx(want).epsilon(1e-8));
  }

  // Sphere of radius r: kappa = 1/r, with derivatives supplied by an
  // independent finite-difference oracle.
  for (double r : {0.5, 2.0}) {
    auto sphere = [r](const Vec& t) -> Vec {
      Vec a(3);
      a << r * std::sin(t[0]) * std::cos(t[1]), r * std::sin(t[0]) * std::sin(t[1]),
          r * std::cos(t[0]);
      return a;
    };
    Vec t(2);
    t << 1.1, 0.7;
    const Mat j = testutil::fd_jacobian(sphere, t);
    const HessianTensor h = testutil::fd_hessian(sphere, t);
    const Mat fi = pullback_metric(j, Vec::Ones(3));
    const Mat jp = pseudoinverse(j, fi, Vec::Ones(3));
    const Mat fii = second_fundamental_form(j, jp, h, Vec::Ones(3));
    CHECK(curvature_scale(fi, fii) == doctest::Approx(1.0 / r).epsilon(1e-4));
  }

  // Affine: zero curvature.
  Rng rng(6);
  const Mat a = random_matrix(rng, 4, 2);
  const Mat fi = pullback_metric(a, Vec::Ones(4));
  const Mat jp = pseudoinverse(a, fi, Vec::Ones(4));
  const Mat fii = second_fundamental_form(a, jp, HessianTensor::Zero(4, 4), Vec::Ones(4));
  CHECK(curvature_scale(fi, fii) == doctest::Approx(0.0));
}

TEST_CASE("fisher matrix") {
  const Mat j = parabola_jac(1);
  const AmbientGaussian g1 = AmbientGaussian::standard(2);
  CHECK(fisher_matrix(j, g1)(0, 0) == doctest::Approx(5.0));

  const AmbientGaussian g4 = AmbientGaussian::make(Vec::Zero(2), 4.0 * Mat::Identity(2, 2));
  CHECK(fisher_matrix(j, g4)(0, 0) == doctest::Approx(5.0 / 4.0));

  Rng rng(7);
  const Mat a = random_matrix(rng, 5, 2);
  CHECK(matrix_rel_err(fisher_matrix(a, AmbientGaussian::standard(5)),
                       pullback_metric(a, Vec::Ones(5))) < 1e-12);
}

TEST_CASE("ambient gaussian invariants") {
  Rng rng(8);
  const Mat sigma = random_spd(rng, 4);
  const AmbientGaussian g = AmbientGaussian::make(random_vector(rng, 4), sigma);
  CHECK(matrix_rel_err(g.whitener.transpose() * g.whitener * g.sigma, Mat::Identity(4, 4)) <
        1e-10);
  CHECK(g.sigma_min_sq > 0);

  Mat not_spd = Mat::Identity(3, 3);
  not_spd(2, 2) = -1.0;
  CHECK_THROWS_AS(AmbientGaussian::make(Vec::Zero(3), not_spd), NumericError);
}

TEST_CASE("whitening") {
  const ExampleSetup ex = parabola();

  SUBCASE("identity transform for a standard gaussian") {
    const WhitenedPair w = whiten(ex.model, AmbientGaussian::standard(2));
    Vec t(1);
    t << 0.7;
    CHECK((w.model.map(t) - ex.model.map(t)).norm() == 0.0);
    CHECK(w.gaussian.is_whitened());
  }

  SUBCASE("diagonal covariance") {
    Mat sigma = Mat::Zero(2, 2);
    sigma(0, 0) = 4.0;
    sigma(1, 1) = 1.0;
    const AmbientGaussian g = AmbientGaussian::make(Vec::Zero(2), sigma);
    CHECK(g.whitener(0, 0) == doctest::Approx(0.5));
    CHECK(g.whitener(1, 1) == doctest::Approx(1.0));
    CHECK(std::abs(g.whitener(0, 1)) + std::abs(g.whitener(1, 0)) < 1e-14);
  }

  SUBCASE("whitened draws have identity covariance") {
    Rng rng(9);
    const Eigen::Index d = 3;
    const Mat sigma = random_spd(rng, d);
    const Vec beta_star = random_vector(rng, d);
    const AmbientGaussian g = AmbientGaussian::make(beta_star, sigma);
    const Mat l = sigma.llt().matrixL();
    const int n = 10000;
    Mat acc = Mat::Zero(d, d);
    Vec mean = Vec::Zero(d);
    for (int i = 0; i < n; ++i) {
      const Vec x = beta_star + l * random_vector(rng, d);
      const Vec y = g.whitener * (x - beta_star);
      acc += y * y.transpose();
      mean += y;
    }
    mean /= n;
    const Mat cov = acc / double(n) - mean * mean.transpose();
    CHECK(matrix_rel_err(cov, Mat::Identity(d, d)) < 0.05);
  }

  SUBCASE("whitening then pullback equals the unwhitened fisher matrix") {
    Rng rng(10);
    const Mat sigma = random_spd(rng, 2);
    const AmbientGaussian g = AmbientGaussian::make(random_vector(rng, 2), sigma);
    const WhitenedPair w = whiten(ex.model, g);
    Vec t(1);
    t << -0.8;
    const Mat jw = w.model.jacobian(t);
    const Mat gamma = fisher_matrix(ex.model.jacobian(t), g);
    CHECK(matrix_rel_err(pullback_metric(jw, Vec::Ones(2)), gamma) < 1e-10);
  }
}

TEST_CASE("geometry_at flags singular points instead of throwing") {
  const ExampleSetup ex = reparabola();
  Vec t(1);
  t << -1.0;  // metric vanishes here
  const GeometryAtPoint g = geometry_at(ex.model, t);
  CHECK(g.singular);
  CHECK(g.pseudoinverse.norm() == 0.0);

  t << 0.5;
  const GeometryAtPoint ok = geometry_at(ex.model, t);
  CHECK_FALSE(ok.singular);
  CHECK(matrix_rel_err(ok.pseudoinverse * ok.jacobian, Mat::Identity(1, 1)) < 1e-8);
}

}  // TEST_SUITE
