#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rsft/scenario.hpp"

using namespace rsft;

TEST_CASE("closed-form Markov data agree with power iteration") {
  oracle::Matrix m{{2.0, 1.0}, {1.0, 3.0}};
  StationaryChain c = markov_closed_form(m);
  oracle::PowerChain p = oracle::power_chain(m);
  for (int u = 0; u < 2; ++u) {
    CHECK(c.pi[u] == doctest::Approx(p.pi[u]).epsilon(1e-12));
    for (int v = 0; v < 2; ++v) CHECK(c.p[u][v] == doctest::Approx(p.p[u][v]).epsilon(1e-12));
  }
  CHECK(c.second_eigenvalue == doctest::Approx((5.0 - p.lambda) / p.lambda).epsilon(1e-12));
  CHECK(c.probability(Word{0, 1, 1}) == doctest::Approx(p.pi[0] * p.p[0][1] * p.p[1][1]));
}

TEST_CASE("built-in scenarios") {
  for (const char* name : {"example5", "example5-tilted", "bernoulli", "markov"}) {
    Scenario s = builtin_scenario(name);
    CHECK(s.name == name);
    CHECK(s.word.size() >= 16);
  }
  CHECK_THROWS_AS(builtin_scenario("nope"), DomainError);
  CHECK(builtin_scenario("bernoulli").oracle.has_value());
  CHECK_FALSE(builtin_scenario("example5").oracle.has_value());
}

TEST_CASE("designated words") {
  Word y = designated_word(3, 64);
  CHECK(y.size() == 64);
  CHECK(y[0] == 2);
  for (std::size_t n = 1; n <= 64; ++n) CHECK(min_return_q(std::span(y).first(n)) == n);
  CHECK(format_word(designated_word(2, 5)) == "21111");
  CHECK(format_word(fibonacci_word(8)) == "21221212");
  CHECK(swap_word(parse_word("1233"), 3) == parse_word("3211"));
}

TEST_CASE("designated word has positive measure") {
  Scenario s = build_example5();
  for (std::size_t n : {2, 4, 6, 8}) {
    Word y = designated_word(3, n);
    auto cell = positive_measure_cell(s.sft, y);
    REQUIRE(cell.has_value());
    double mid = 0.5 * (cell->lo + cell->hi);
    CHECK(cylinder_measure(s.sft, s.potential, mid, y).probability > 0.0);
  }
}

TEST_CASE("support of omega -> mu(C_2(12)) is I = [0, 3/4)") {
  for (const char* psi : {"zero", "tilted"}) {
    Scenario s = build_example5(kDefaultAngle, psi);
    for (int i = 0; i < 200; ++i) {
      double omega = (i + 0.5) / 200.0;
      double mu = cylinder_measure(s.sft, s.potential, omega, Word{0, 1}).probability;
      if (omega < 0.75) CHECK(mu > 0.0);
      else CHECK(mu == 0.0);
    }
  }
}

TEST_CASE("symmetry") {
  CHECK(respects_symmetry(build_example5()));
  CHECK(respects_symmetry(build_example5(kDefaultAngle, "tilted")));
  CHECK(respects_symmetry(build_bernoulli_oracle(3)));

  Scenario broken = build_example5();
  broken.potential = Potential::constant_pair({{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}});
  CHECK_FALSE(respects_symmetry(broken));
  auto grid = quadrature_grid(IntervalPartition(), 4);
  CHECK_FALSE(symmetry_check(broken, 3, grid).applicable);
}

TEST_CASE("half-turn identity mu_omega(C_n(x)) = mu_{omega+1/2}(C_n(x'))") {
  auto grid = quadrature_grid(IntervalPartition(), 16);
  for (const char* psi : {"zero", "tilted"}) {
    ReportEntry e = symmetry_check(build_example5(kDefaultAngle, psi), 6, grid);
    CHECK(e.passed);
    CHECK(e.values[0] < 1e-6);
  }
}

TEST_CASE("non-mixing Jensen gap") {
  NonmixingOptions opts;
  opts.points_per_cell = 8;
  NonmixingResult r = nonmixing_gap(build_example5(), opts);
  CHECK(r.gap > 10.0 * r.quadrature_error);
  CHECK(r.support_measure == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(r.j == doctest::Approx(r.gap + r.mu * r.mu));
  REQUIRE(r.correlation.size() == opts.approach_terms);
  CHECK(std::abs(r.correlation.back() - r.j) < std::abs(r.correlation.back() - r.mu * r.mu));
  CHECK(nonmixing_entry(r).passed);
}
