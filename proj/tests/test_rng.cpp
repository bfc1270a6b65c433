// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "mimopred/linalg.hpp"
#include "mimopred/rng.hpp"

using namespace mimopred;

TEST_SUITE("rng") {

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.complex_normal() == b.complex_normal());
  }
}

TEST_CASE("different seeds give different streams") {
  Rng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 64; ++i) equal += (a.next_u64() == b.next_u64());
  CHECK(equal == 0);
}

TEST_CASE("uniform stays in [0,1) and respects custom ranges") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform(-3.0, 7.0);
    CHECK(v >= -3.0);
    CHECK(v < 7.0);
  }
}

TEST_CASE("gaussian moments are roughly standard") {
  Rng rng(9);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("complex_normal has unit total variance split over components") {
  Rng rng(13);
  const int n = 20000;
  double var = 0.0;
  for (int i = 0; i < n; ++i) var += std::norm(rng.complex_normal());
  CHECK(var / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("complex_normal_vector length and determinism") {
  Rng a(17), b(17);
  const CVector va = a.complex_normal_vector(8);
  const CVector vb = b.complex_normal_vector(8);
  CHECK(va.size() == 8);
  CHECK((va - vb).norm() == 0.0);
}

TEST_CASE("mix_seed separates nearby key tuples") {
  const auto s1 = mix_seed({1, 2, 3});
  const auto s2 = mix_seed({1, 2, 4});
  const auto s3 = mix_seed({1, 3, 2});
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(s2 != s3);
}

}  // TEST_SUITE
