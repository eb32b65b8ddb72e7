#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lieaug/rng.hpp"

using namespace lieaug;

TEST_CASE("deterministic streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("split streams are independent of draw order") {
  Rng root(7);
  Rng s1 = root.split(1);
  const std::uint64_t first = s1.next_u64();

  Rng root2(7);
  for (int i = 0; i < 10; ++i) root2.next_u64();  // consume the parent
  Rng s1_again = root2.split(1);
  CHECK(s1_again.next_u64() == first);

  Rng s2 = root.split(2);
  CHECK(s2.next_u64() != first);
}

TEST_CASE("uniform ranges") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform(-2.5, 1.5);
    CHECK(v >= -2.5);
    CHECK(v < 1.5);
    const long long k = rng.uniform_int(-3, 3);
    CHECK(k >= -3);
    CHECK(k <= 3);
  }
}

TEST_CASE("integer draws hit every value in a small range") {
  Rng rng(5);
  int counts[7] = {0};
  for (int i = 0; i < 7000; ++i) ++counts[rng.uniform_int(-3, 3) + 3];
  for (int c : counts) CHECK(c > 700);
}

TEST_CASE("normal moments are sane") {
  Rng rng(11);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}
