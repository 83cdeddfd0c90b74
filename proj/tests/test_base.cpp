#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "rsft/base.hpp"

using namespace rsft;

TEST_CASE("frac stays in [0, 1)") {
  CHECK(frac(1.25) == doctest::Approx(0.25));
  CHECK(frac(-0.25) == doctest::Approx(0.75));
  CHECK(frac(3.0) == 0.0);
  CHECK(frac(-1e-18) < 1.0);
}

TEST_CASE("rotation rejects short rational angles") {
  CHECK_THROWS_AS(BaseRotation{0.5}, DomainError);
  CHECK_THROWS_AS(BaseRotation{0.0}, DomainError);
  CHECK_THROWS_AS(BaseRotation{1.0}, DomainError);
  CHECK_THROWS_AS(BaseRotation{3.0 / 7.0}, DomainError);
  CHECK_NOTHROW(BaseRotation{kDefaultAngle});
}

TEST_CASE("rotation composes and inverts") {
  BaseRotation base(kDefaultAngle);
  for (double omega : {0.0, 0.1, 0.5, 0.93}) {
    double forward = base.point(omega, 7);
    CHECK(base.point(forward, -7) == doctest::Approx(omega).epsilon(1e-12));
    CHECK(base.point(base.point(omega, 3), 4) == doctest::Approx(forward).epsilon(1e-12));
  }
  auto o = orbit(base, 0.1, 4);
  REQUIRE(o.size() == 5);
  CHECK(o[2] == doctest::Approx(frac(0.1 + 2 * kDefaultAngle)));
}

TEST_CASE("partition cells") {
  IntervalPartition p({0.0, 0.25, 0.5, 0.75});
  CHECK(p.cell_of(0.0) == 0);
  CHECK(p.cell_of(0.25) == 1);
  CHECK(p.cell_of(0.49) == 1);
  CHECK(p.cell_of(0.99) == 3);
  CHECK(p.cell_end(3) == 1.0);
  CHECK_THROWS_AS(IntervalPartition({0.2, 0.5}), DomainError);
  CHECK_THROWS_AS(IntervalPartition({0.0, 0.5, 0.3}), DomainError);
}

TEST_CASE("refine matches the preimage breakpoints") {
  BaseRotation base(kDefaultAngle);
  IntervalPartition p({0.0, 0.25, 0.5, 0.75});
  for (std::size_t k = 1; k <= 4; ++k) {
    // Oracle: breakpoints b - i r mod 1 for i < k.
    std::set<long long> expected;
    for (std::size_t i = 0; i < k; ++i)
      for (double b : p.breakpoints()) expected.insert(std::llround(frac(b - static_cast<double>(i) * kDefaultAngle) * 1e9));
    IntervalPartition r = refine(p, base, k);
    std::set<long long> got;
    for (double b : r.breakpoints()) got.insert(std::llround(b * 1e9));
    CHECK(got == expected);
  }
}

TEST_CASE("refined itinerary is constant on each cell") {
  BaseRotation base(kDefaultAngle);
  IntervalPartition p({0.0, 0.25, 0.5, 0.75});
  const std::size_t k = 5;
  IntervalPartition r = refine(p, base, k);
  for (std::size_t c = 0; c < r.size(); ++c) {
    double lo = r.cell_begin(c), hi = r.cell_end(c);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t a = p.cell_of(base.point(lo + 1e-9, static_cast<std::int64_t>(i)));
      std::size_t b = p.cell_of(base.point(hi - 1e-9, static_cast<std::int64_t>(i)));
      CHECK(a == b);
    }
  }
}

TEST_CASE("quadrature weights sum to one and integrate linear functions") {
  IntervalPartition p({0.0, 0.3, 0.7});
  auto grid = quadrature_grid(p, 3);
  CHECK(grid.size() == 9);
  double total = 0.0, first = 0.0;
  for (const auto& q : grid) {
    total += q.weight;
    first += q.weight * q.omega;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(first == doctest::Approx(0.5));
}

TEST_CASE("convergents of sqrt(2) - 1") {
  auto c = convergents(kDefaultAngle, 1000);
  std::vector<std::int64_t> q;
  for (auto x : c) q.push_back(x.q);
  std::vector<std::int64_t> expected{1, 2, 5, 12, 29, 70, 169, 408, 985};
  CHECK(std::equal(expected.begin(), expected.end(), q.begin() + (q.size() - expected.size())));
  for (auto x : c) CHECK(std::abs(kDefaultAngle - static_cast<double>(x.p) / x.q) < 1.0 / (x.q * x.q) + 1e-15);
}

TEST_CASE("half-turn sequence approaches 1/2") {
  BaseRotation base(kDefaultAngle);
  auto k = half_turn_sequence(base, 6);
  std::vector<std::int64_t> expected{1, 6, 35, 204, 1189, 6930};
  CHECK(k == expected);
  double prev = 1.0;
  for (auto ki : k) {
    double d = std::abs(frac(static_cast<double>(ki) * kDefaultAngle) - 0.5);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-4);
}
