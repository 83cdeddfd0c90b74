#include <cmath>
#include <random>

#include "doctest.h"
#include "rsft/process.hpp"
#include "rsft/scenario.hpp"

using namespace rsft;

TEST_CASE("interval unions") {
  IntervalUnion r({{0.0, 1.0}, {2.0, 3.5}});
  CHECK(r.lebesgue() == doctest::Approx(2.5));
  CHECK(r.sup() == 3.5);
  CHECK_THROWS_AS(IntervalUnion({{0.0, 1.0}, {0.5, 2.0}}), DomainError);
  CHECK_THROWS_AS(IntervalUnion({{1.0, 2.0}, {0.0, 0.5}}), DomainError);
  CHECK_THROWS_AS(IntervalUnion({{1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(IntervalUnion({{-1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(IntervalUnion({}), DomainError);
  try {
    IntervalUnion({{0.0, 1.0}, {0.5, 2.0}});
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("0") != std::string::npos);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("time change is the running sum of cylinder masses") {
  Scenario s = build_example5(kDefaultAngle, "tilted");
  CylinderSet a = CylinderSet::single(designated_word(3, 4));
  FiberChain chain = converged_chain(s.sft, s.potential, 0.1, 60);
  TimeChange tc = time_change(chain, a, 50);
  REQUIRE(tc.horizon() == 50);
  double sum = 0.0;
  for (std::size_t k = 1; k <= 50; ++k) {
    double direct = cylinder_measure(s.sft, s.potential, s.sft.base().point(0.1, static_cast<std::int64_t>(k)), a.words()[0]).probability;
    CHECK(tc.masses[k] == doctest::Approx(direct).epsilon(1e-9));
    sum += tc.masses[k];
    CHECK(tc.partial[k] == doctest::Approx(sum));
  }
  CHECK(tc.partial[0] == 0.0);
  CHECK(tc.max_step() >= tc.min_step());
}

TEST_CASE("window constants bracket every interval") {
  Scenario s = build_example5();
  CylinderSet a = CylinderSet::single(designated_word(3, 4));
  IntervalUnion r({{0.0, 1.0}, {1.5, 2.0}, {3.0, 4.0}});
  HittingSetup setup = prepare_hitting(s.sft, s.potential, 0.1, a, r.sup());
  const TimeChange& tc = setup.time_change;
  CHECK(tc.partial.back() > r.sup() + tc.max_step());
  WindowConstants wc = window_constants(tc, r);
  std::size_t k_star = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Interval& iv = r.intervals()[i];
    std::size_t p = wc.p[i], q = wc.q[i];
    CHECK(tc.partial[p] <= iv.lo);
    CHECK(tc.partial[p + 1] > iv.lo);
    CHECK(tc.partial[p + q] <= iv.hi);
    CHECK(tc.partial[p + q + 1] > iv.hi);
    k_star = std::max(k_star, p + q);
  }
  CHECK(wc.k_star == k_star);
  CHECK(static_cast<double>(wc.k_star) * tc.min_step() <= r.sup());
  CHECK(r.sup() <= static_cast<double>(wc.k_star + 1) * tc.max_step());

  TimeChange short_tc = time_change(setup.chain, a, 3);
  CHECK_THROWS_AS(window_constants(short_tc, r), HorizonError);
}

TEST_CASE("two intervals take k* from the later one") {
  Scenario s = build_bernoulli_oracle(3);
  CylinderSet a = CylinderSet::single(designated_word(3, 3));
  IntervalUnion r({{0.0, 1.0}, {2.0, 2.9}});
  HittingSetup setup = prepare_hitting(s.sft, s.potential, 0.1, a, r.sup());
  WindowConstants wc = window_constants(setup.time_change, r);
  CHECK(wc.p[0] == 0);
  CHECK(wc.k_star == wc.p[1] + wc.q[1]);
  CHECK(wc.k_star == 78);  // floor(2.9 * 27)
}

TEST_CASE("realizations, counts and first hits") {
  Scenario s = build_bernoulli_oracle(2);
  CylinderSet a = CylinderSet::single(parse_word("12"));
  TimeChange tc = time_change(s.sft, s.potential, 0.3, a, 8);
  Word x = parse_word("1212211212");
  PointProcessRealization re = realize_process(tc, a, x);
  // windows "12" at offsets 2, 6, 8 (offset 0 is not counted)
  REQUIRE(re.times.size() == 3);
  CHECK(re.times[0] == doctest::Approx(0.5));
  CHECK(re.times[1] == doctest::Approx(1.5));
  CHECK(re.times[2] == doctest::Approx(2.0));
  // Intervals are open: the point at 1.5 is in neither.
  IntervalUnion r({{0.0, 1.0}, {1.0, 1.5}, {1.5, 2.5}});
  CHECK(counts_in(re, r) == std::vector<std::size_t>{1, 0, 1});
  CHECK(first_hitting(x, a, 8) == std::optional<std::size_t>(2));
  CHECK_FALSE(first_hitting(parse_word("1111"), a, 2).has_value());
}
