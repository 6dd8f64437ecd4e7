#include <doctest.h>

#include <cmath>
#include <vector>

#include "tbp/rng.hpp"

using namespace tbp;

TEST_SUITE("rng") {

TEST_CASE("streams are reproducible and substreams distinct") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng s0 = Rng::substream(7, 0);
  Rng s1 = Rng::substream(7, 1);
  Rng s0b = Rng::substream(7, 0);
  bool all_equal = true;
  for (int i = 0; i < 64; ++i) {
    const auto x = s0.next_u64();
    all_equal = all_equal && (x == s1.next_u64());
    CHECK(x == s0b.next_u64());
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform stays inside the open interval") {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0, sum2 = 0, sum3 = 0, sum4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
    sum3 += x * x * x;
    sum4 += x * x * x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(sum3 / n) < 0.05);
  CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("normal tail fractions match the Gaussian law") {
  Rng rng(19);
  const int n = 400000;
  int beyond1 = 0, beyond2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::abs(rng.normal());
    beyond1 += x > 1.0;
    beyond2 += x > 2.0;
  }
  CHECK(double(beyond1) / n == doctest::Approx(0.31731).epsilon(0.02));
  CHECK(double(beyond2) / n == doctest::Approx(0.04550).epsilon(0.06));
}

}  // TEST_SUITE
