#include <doctest.h>

#include <cmath>
#include <random>

#include "ossvm/error.hpp"
#include "ossvm/kernel.hpp"
#include "support/fixtures.hpp"

using namespace ossvm;
using fixtures::point;

TEST_CASE("rbf of a point with itself is one") {
  for (double g : {0.01, 1.0, 37.5}) {
    CHECK(rbf(point(1, 0.3, -2.0), point(1, 0.3, -2.0), {g}) == 1.0);
  }
}

TEST_CASE("rbf at unit distance with gamma one") {
  CHECK(rbf(point(1, 0, 0), point(1, 1, 0), {1.0}) == doctest::Approx(0.367879441).epsilon(1e-9));
}

TEST_CASE("rbf vanishes far away") {
  const double v = rbf(point(1, 0, 0), point(1, 10, 0), {1.0});
  CHECK(v <= 1e-40);
  double prev = 1.0;
  for (double d = 0.5; d < 40; d += 0.5) {
    const double k = rbf(point(1, 0, 0), point(1, d, 0), {1.0});
    CHECK(k <= prev);
    prev = k;
  }
  CHECK(prev == 0.0);  // flushed
}

TEST_CASE("rbf rejects non-positive gamma") {
  CHECK_THROWS_AS(RbfKernel({0.0}), Error);
  CHECK_THROWS_AS(rbf(point(1, 0, 0), point(1, 1, 0), {-1.0}), Error);
}

TEST_CASE("rbf properties on random pairs") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 500; ++t) {
    const auto a = point(1, u(gen), u(gen));
    const auto b = point(1, u(gen), u(gen));
    const KernelParams p{std::abs(u(gen)) + 0.01};
    const double k = rbf(a, b, p);
    CHECK(k == rbf(b, a, p));
    CHECK(k <= 1.0);
    CHECK(k >= 0.0);
    if (!(a == b)) CHECK(k < 1.0);
  }
}

TEST_CASE("rbf strictly decreasing along a ray") {
  const auto a = point(1, 0.2, 0.4);
  double prev = 1.0;
  for (int s = 1; s <= 20; ++s) {
    const double k = rbf(a, point(1, 0.2 + 0.1 * s, 0.4 - 0.05 * s), {0.5});
    CHECK(k < prev);
    prev = k;
  }
}

TEST_CASE("rbf agrees with a dense evaluation") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> xa{u(gen), u(gen), 0.0, u(gen)};
    std::vector<double> xb{u(gen), 0.0, u(gen), u(gen)};
    const double g = 0.1 + 5 * u(gen);
    const double ref = oracle::dense_rbf(xa, xb, g);
    CHECK(rbf(make_dense_sample(1, xa), make_dense_sample(1, xb), {g}) ==
          doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("kernel_row on tiny sets") {
  std::vector<SparseSample> one{point(1, 0.5, 0.5)};
  KernelCache c1(one, {2.0}, 1 << 20);
  CHECK(kernel_row(0, c1) == std::vector<double>{1.0});

  std::vector<SparseSample> twins{point(1, 0.5, 0.5), point(-1, 0.5, 0.5)};
  KernelCache c2(twins, {2.0}, 1 << 20);
  CHECK(kernel_row(1, c2) == std::vector<double>{1.0, 1.0});

  std::vector<SparseSample> three{point(1, 0.1, 0.9), point(1, 0.7, 0.2), point(-1, 0.3, 0.3)};
  KernelCache c3(three, {1.5}, 1 << 20);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto row = kernel_row(i, c3);
    REQUIRE(row.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(row[j] == doctest::Approx(rbf(three[i], three[j], {1.5})).epsilon(1e-14));
    }
    CHECK(c3.contains(i));
  }
}

TEST_CASE("kernel cache evicts least recently used rows") {
  std::vector<SparseSample> s;
  for (int i = 0; i < 10; ++i) s.push_back(point(1, 0.1 * i, 0.0));
  const std::size_t row_bytes = 10 * sizeof(double);
  KernelCache cache(s, {1.0}, 3 * row_bytes);
  cache.row(0);
  cache.row(1);
  cache.row(2);
  CHECK(cache.cached_rows() == 3);
  cache.row(0);  // refresh 0
  cache.row(3);  // evicts 1
  CHECK(cache.contains(0));
  CHECK_FALSE(cache.contains(1));
  CHECK(cache.contains(3));
  CHECK(cache.used_bytes() <= cache.capacity_bytes());
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 4);
}

TEST_CASE("kernel cache with zero capacity still returns rows") {
  std::vector<SparseSample> s{point(1, 0, 0), point(1, 1, 1)};
  KernelCache cache(s, {1.0}, 0);
  const auto r = cache.row(1);
  CHECK((*r)[1] == 1.0);
  CHECK(cache.cached_rows() == 0);
  CHECK(cache.diagonal(0) == 1.0);
}
