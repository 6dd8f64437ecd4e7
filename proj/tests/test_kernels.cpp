#include <doctest.h>

#include <vector>

#include "tbp/kernels.hpp"
#include "tbp/rng.hpp"

using namespace tbp;
namespace k = tbp::kernels;
namespace kd = tbp::kernels::detail;

namespace {

std::vector<double> random_buf(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() * 3.0;
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference values") {
  const double a[4] = {1, 2, 3, 4};
  const double b[4] = {10, 20, 30, 40};
  CHECK(kd::dot_scalar(a, b, 4) == doctest::Approx(300.0));
  CHECK(kd::sumsq_scalar(a, 4) == doctest::Approx(30.0));
  CHECK(kd::sumsq_diff_scalar(a, b, 4) == doctest::Approx(81 + 324 + 729 + 1296));
  const double sign[4] = {-1, 1, 1, -1};
  CHECK(kd::signed_sumsq_diff_scalar(a, b, sign, 4) == doctest::Approx(-81 + 324 + 729 - 1296));

  double y[4] = {1, 1, 1, 1};
  kd::axpy_scalar(2.0, a, y, 4);
  CHECK(y[0] == 3.0);
  CHECK(y[3] == 9.0);

  double out[4];
  kd::add_scaled_scalar(a, 0.5, b, out, 4);
  CHECK(out[0] == 6.0);
  CHECK(out[2] == 18.0);
}

TEST_CASE("dot handles zero length") {
  CHECK(k::dot(nullptr, nullptr, 0) == 0.0);
  CHECK(k::sumsq(nullptr, 0) == 0.0);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variants match the scalar reference") {
  if (!kd::cpu_has_avx2()) {
    MESSAGE("cpu lacks avx2, skipping equivalence checks");
    return;
  }
  Rng rng(20240811);
  // Lengths straddle the vector width and include ragged tails and offsets.
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 170u, 1001u}) {
    for (std::size_t off : {0u, 1u, 3u}) {
      auto a = random_buf(rng, n + off);
      auto b = random_buf(rng, n + off);
      auto sign = random_buf(rng, n + off);
      for (auto& s : sign) s = s > 0 ? 1.0 : -1.0;
      const double* pa = a.data() + off;
      const double* pb = b.data() + off;
      const double tol = 1e-13 * double(n);

      CHECK(kd::dot_avx2(pa, pb, n) ==
            doctest::Approx(kd::dot_scalar(pa, pb, n)).epsilon(tol));
      CHECK(kd::sumsq_avx2(pa, n) == doctest::Approx(kd::sumsq_scalar(pa, n)).epsilon(tol));
      CHECK(kd::sumsq_diff_avx2(pa, pb, n) ==
            doctest::Approx(kd::sumsq_diff_scalar(pa, pb, n)).epsilon(tol));
      CHECK(kd::signed_sumsq_diff_avx2(pa, pb, sign.data() + off, n) ==
            doctest::Approx(kd::signed_sumsq_diff_scalar(pa, pb, sign.data() + off, n))
                .epsilon(1e-11));

      auto y1 = random_buf(rng, n);
      auto y2 = y1;
      kd::axpy_scalar(1.7, pa, y1.data(), n);
      kd::axpy_avx2(1.7, pa, y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

      // FMA in the vector path rounds once where the scalar path rounds
      // twice, so equality here is approximate.
      std::vector<double> o1(n), o2(n);
      kd::add_scaled_scalar(pa, -0.3, pb, o1.data(), n);
      kd::add_scaled_avx2(pa, -0.3, pb, o2.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("isa can be forced and restored") {
  const k::Isa initial = k::active_isa();
  k::set_isa(k::Isa::scalar);
  CHECK(k::active_isa() == k::Isa::scalar);
  const double a[3] = {1, 2, 2};
  CHECK(k::sumsq(a, 3) == 9.0);
  if (kd::cpu_has_avx2()) {
    k::set_isa(k::Isa::avx2);
    CHECK(k::active_isa() == k::Isa::avx2);
    CHECK(k::sumsq(a, 3) == 9.0);
  }
  k::set_isa(initial);
}
#endif

TEST_CASE("gemv_cols multiplies by the transposed column-major matrix") {
  // A stored d x s column-major; out = A^T x.
  const std::size_t d = 5, s = 2;
  std::vector<double> a(d * s);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = double(i + 1);
  std::vector<double> x = {1, 0, 2, 0, 3};
  double out[2];
  k::gemv_cols(a.data(), d, s, x.data(), out);
  CHECK(out[0] == doctest::Approx(1 * 1 + 3 * 2 + 5 * 3));
  CHECK(out[1] == doctest::Approx(6 * 1 + 8 * 2 + 10 * 3));
}

}  // TEST_SUITE
