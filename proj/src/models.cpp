#include "tbp/models.hpp"

#include <Eigen/QR>
#include <cmath>

#include "tbp/errors.hpp"
#include "tbp/rng.hpp"

namespace tbp {

ExampleSetup parabola() {
  auto map = [](const Vec& t) -> Vec {
    Vec a(2);
    a << t[0], t[0] * t[0];
    return a;
  };
  auto jac = [](const Vec& t) -> Mat {
    Mat j(2, 1);
    j << 1.0, 2.0 * t[0];
    return j;
  };
  auto hess = [](const Vec&) -> HessianTensor {
    HessianTensor h(2, 1);
    h << 0.0, 2.0;
    return h;
  };
  Vec beta_star(2);
  beta_star << 1.0, 2.0;
  ExampleSetup ex{
      "parabola",
      ManifoldModel(1, 2, map, jac, hess),
      AmbientGaussian::make(beta_star, Mat::Identity(2, 2)),
      SamplingRegion(Vec::Constant(1, -3.0), Vec::Constant(1, 3.0)),
      [](double x) { return std::exp(-0.5 * (std::pow(x, 4) - 3 * x * x - 2 * x + 5)); }};
  return ex;
}

namespace {

// Klein bottle chart in R^5 before rotation; component 5 is identically 0.
Vec klein_chart(const Vec& t) {
  const double r = t[0], psi = t[1], phi = t[2];
  Vec a(5);
  a << 0.5 * (1 + r * std::cos(psi)) * std::cos(phi),
      0.5 * (1 + r * std::cos(psi)) * std::sin(phi),
      0.5 * r * std::sin(psi) * std::cos(phi / 2),
      0.5 * r * std::sin(psi) * std::sin(phi / 2),
      0.0;
  return a;
}

Mat klein_chart_jacobian(const Vec& t) {
  const double r = t[0], psi = t[1], phi = t[2];
  const double cp = std::cos(psi), sp = std::sin(psi);
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ch = std::cos(phi / 2), sh = std::sin(phi / 2);
  Mat j = Mat::Zero(5, 3);
  j.row(0) << 0.5 * cp * cf, -0.5 * r * sp * cf, -0.5 * (1 + r * cp) * sf;
  j.row(1) << 0.5 * cp * sf, -0.5 * r * sp * sf, 0.5 * (1 + r * cp) * cf;
  j.row(2) << 0.5 * sp * ch, 0.5 * r * cp * ch, -0.25 * r * sp * sh;
  j.row(3) << 0.5 * sp * sh, 0.5 * r * cp * sh, 0.25 * r * sp * ch;
  return j;
}

HessianTensor klein_chart_hessian(const Vec& t) {
  const double r = t[0], psi = t[1], phi = t[2];
  const double cp = std::cos(psi), sp = std::sin(psi);
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ch = std::cos(phi / 2), sh = std::sin(phi / 2);
  HessianTensor h = HessianTensor::Zero(5, 9);
  auto set = [&](Eigen::Index nu, Eigen::Index mu, Eigen::Index mup, double v) {
    h(nu, hessian_col(3, mu, mup)) = v;
    h(nu, hessian_col(3, mup, mu)) = v;
  };
  // component 1: (1 + r cos psi) cos phi / 2
  set(0, 0, 1, -0.5 * sp * cf);
  set(0, 0, 2, -0.5 * cp * sf);
  set(0, 1, 1, -0.5 * r * cp * cf);
  set(0, 1, 2, 0.5 * r * sp * sf);
  set(0, 2, 2, -0.5 * (1 + r * cp) * cf);
  // component 2: (1 + r cos psi) sin phi / 2
  set(1, 0, 1, -0.5 * sp * sf);
  set(1, 0, 2, 0.5 * cp * cf);
  set(1, 1, 1, -0.5 * r * cp * sf);
  set(1, 1, 2, -0.5 * r * sp * cf);
  set(1, 2, 2, -0.5 * (1 + r * cp) * sf);
  // component 3: r sin psi cos(phi/2) / 2
  set(2, 0, 1, 0.5 * cp * ch);
  set(2, 0, 2, -0.25 * sp * sh);
  set(2, 1, 1, -0.5 * r * sp * ch);
  set(2, 1, 2, -0.25 * r * cp * sh);
  set(2, 2, 2, -0.125 * r * sp * ch);
  // component 4: r sin psi sin(phi/2) / 2
  set(3, 0, 1, 0.5 * cp * sh);
  set(3, 0, 2, 0.25 * sp * ch);
  set(3, 1, 1, -0.5 * r * sp * sh);
  set(3, 1, 2, 0.25 * r * cp * ch);
  set(3, 2, 2, -0.125 * r * sp * sh);
  return h;
}

// Deterministic orthogonal matrix: QR of a seeded standard-normal matrix with
// the R diagonal sign fixed positive.
Mat seeded_rotation(Eigen::Index n, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, 0xA11CE);
  Mat g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

ExampleSetup klein(std::uint64_t rotation_seed) {
  const Mat rot = seeded_rotation(5, rotation_seed);
  auto map = [rot](const Vec& t) -> Vec { return rot * klein_chart(t); };
  auto jac = [rot](const Vec& t) -> Mat { return rot * klein_chart_jacobian(t); };
  auto hess = [rot](const Vec& t) -> HessianTensor { return rot * klein_chart_hessian(t); };
  Vec anchor(3);
  anchor << 3.0, M_PI / 4, M_PI / 2;
  const Vec beta_star = rot * klein_chart(anchor);
  Vec lo(3), hi(3);
  lo << 2.0, 0.0, 0.0;
  hi << 8.0, 2 * M_PI, 2 * M_PI;
  return ExampleSetup{"klein",
                      ManifoldModel(3, 5, map, jac, hess),
                      AmbientGaussian::make(beta_star, Mat::Identity(5, 5)),
                      SamplingRegion(lo, hi),
                      nullptr};
}

namespace {

double reparabola_poly(double x) { return std::pow(x, 4) - 3 * x * x - 2 * x + 5; }

}  // namespace

ExampleSetup reparabola() {
  auto map = [](const Vec& t) -> Vec {
    const double f = reparabola_poly(t[0]);
    if (f < 0) throw NumericError("reparabola map: negative radicand");
    Vec a(2);
    a << std::sqrt(f), 0.0;
    return a;
  };
  auto jac = [](const Vec& t) -> Mat {
    const double x = t[0];
    const double f = reparabola_poly(x);
    if (f < 0) throw NumericError("reparabola jacobian: negative radicand");
    Mat j(2, 1);
    j << (2 * std::pow(x, 3) - 3 * x - 1) / std::sqrt(f), 0.0;
    return j;
  };
  // Hessian deliberately omitted: the image is a straight ray, so compactness
  // runs metric-only.
  return ExampleSetup{
      "reparabola",
      ManifoldModel(1, 2, map, jac),
      AmbientGaussian::standard(2),
      SamplingRegion(Vec::Constant(1, -3.0), Vec::Constant(1, 3.0)),
      [](double x) { return std::exp(-0.5 * reparabola_poly(x)); }};
}

ExampleSetup beta_example(double a, double b, double delta) {
  if (!(a > 0) || !(b > 0)) throw InvalidInput("beta shape parameters must be positive");
  if (!(delta > 0) || !(delta < 0.5)) throw InvalidInput("beta region clip must be in (0, 0.5)");
  // Components sqrt(-2 L_k) with L_1 = ln(x(1-x)), L_2 = a ln x,
  // L_3 = b ln(1-x); the imaginary first component is carried by the
  // signature instead of complex arithmetic.
  auto lvals = [a, b](double x) -> Eigen::Vector3d {
    return {std::log(x * (1 - x)), a * std::log(x), b * std::log(1 - x)};
  };
  auto lprimes = [a, b](double x) -> Eigen::Vector3d {
    return {(1 - 2 * x) / (x * (1 - x)), a / x, -b / (1 - x)};
  };
  auto lsec = [a, b](double x) -> Eigen::Vector3d {
    const double q = 1 - x;
    return {-1 / (x * x) - 1 / (q * q), -a / (x * x), -b / (q * q)};
  };
  auto map = [lvals](const Vec& t) -> Vec {
    const Eigen::Vector3d l = lvals(t[0]);
    if (!((-2.0 * l.array()) >= 0).all()) throw NumericError("beta map: negative radicand");
    return (-2.0 * l.array()).sqrt().matrix();
  };
  auto jac = [lvals, lprimes](const Vec& t) -> Mat {
    const Eigen::Vector3d l = lvals(t[0]);
    const Eigen::Vector3d lp = lprimes(t[0]);
    Mat j(3, 1);
    for (int k = 0; k < 3; ++k) j(k, 0) = -lp[k] / std::sqrt(-2.0 * l[k]);
    return j;
  };
  auto hess = [lvals, lprimes, lsec](const Vec& t) -> HessianTensor {
    const Eigen::Vector3d l = lvals(t[0]);
    const Eigen::Vector3d lp = lprimes(t[0]);
    const Eigen::Vector3d ls = lsec(t[0]);
    HessianTensor h(3, 1);
    for (int k = 0; k < 3; ++k) {
      const double f = std::sqrt(-2.0 * l[k]);
      h(k, 0) = -ls[k] / f - lp[k] * lp[k] / (f * f * f);
    }
    return h;
  };
  Vec signature(3);
  signature << -1.0, 1.0, 1.0;
  return ExampleSetup{
      "beta",
      ManifoldModel(1, 3, map, jac, hess, signature),
      AmbientGaussian::standard(3),
      SamplingRegion(Vec::Constant(1, delta), Vec::Constant(1, 1.0 - delta)),
      [a, b](double x) { return std::pow(x, a - 1) * std::pow(1 - x, b - 1); }};
}

ExampleSetup synthetic_highd(Eigen::Index s, Eigen::Index d, std::uint64_t seed, double amplitude,
                             int n_waves) {
  if (s < 1 || d <= s) throw InvalidInput("synthetic model requires d > s >= 1");
  if (n_waves < 0) throw InvalidInput("synthetic model requires n_waves >= 0");
  Rng rng = Rng::substream(seed, 0x51D);
  Mat a(d, s);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < s; ++j) a(i, j) = rng.normal();
  const int waves = amplitude == 0.0 ? 0 : n_waves;
  Mat b(d, std::max(waves, 1));
  Mat omega(s, std::max(waves, 1));
  Vec phase(std::max(waves, 1));
  for (int k = 0; k < waves; ++k) {
    Vec bk(d);
    for (Eigen::Index i = 0; i < d; ++i) bk[i] = rng.normal();
    b.col(k) = amplitude * bk.normalized();
    for (Eigen::Index j = 0; j < s; ++j) omega(j, k) = rng.normal();
    phase[k] = 2 * M_PI * rng.uniform();
  }
  auto map = [a, b, omega, phase, waves](const Vec& t) -> Vec {
    Vec out = a * t;
    for (int k = 0; k < waves; ++k) out += b.col(k) * std::sin(omega.col(k).dot(t) + phase[k]);
    return out;
  };
  auto jac = [a, b, omega, phase, waves](const Vec& t) -> Mat {
    Mat out = a;
    for (int k = 0; k < waves; ++k)
      out += std::cos(omega.col(k).dot(t) + phase[k]) * b.col(k) * omega.col(k).transpose();
    return out;
  };
  auto hess = [b, omega, phase, waves, s, d](const Vec& t) -> HessianTensor {
    HessianTensor out = HessianTensor::Zero(d, s * s);
    for (int k = 0; k < waves; ++k) {
      const double sk = std::sin(omega.col(k).dot(t) + phase[k]);
      for (Eigen::Index mu = 0; mu < s; ++mu)
        for (Eigen::Index mup = 0; mup < s; ++mup)
          out.col(hessian_col(s, mu, mup)) -= sk * omega(mu, k) * omega(mup, k) * b.col(k);
    }
    return out;
  };
  const SamplingRegion region(Vec::Constant(s, -1.0), Vec::Constant(s, 1.0));
  const Vec beta_star = map(region.centroid());
  return ExampleSetup{"synthetic_highd",
                      ManifoldModel(s, d, map, jac, hess),
                      AmbientGaussian::make(beta_star, Mat::Identity(d, d)),
                      region,
                      nullptr};
}

std::vector<std::string> example_names() {
  return {"parabola", "klein", "reparabola", "beta", "synthetic_highd"};
}

}  // namespace tbp
