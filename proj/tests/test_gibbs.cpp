#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rsft/gibbs.hpp"
#include "rsft/scenario.hpp"

using namespace rsft;

TEST_CASE("Bernoulli cylinders are uniform") {
  Scenario s = build_bernoulli_oracle(3);
  for (std::size_t n = 1; n <= 8; ++n) {
    CylinderMeasureTable t = measure_table(s.sft, s.potential, 0.37, n);
    CHECK(t.probs.size() == static_cast<std::size_t>(std::pow(3, n)));
    for (const auto& [w, p] : t.probs) CHECK(std::abs(p - std::pow(3.0, -static_cast<double>(n))) < 1e-12);
  }
}

TEST_CASE("Markov cylinders agree with power iteration") {
  oracle::Matrix m{{2.0, 1.0}, {1.0, 3.0}};
  oracle::PowerChain chain = oracle::power_chain(m);
  Scenario s = build_markov_oracle(m);
  for (std::size_t n = 1; n <= 8; ++n) {
    CylinderMeasureTable t = measure_table(s.sft, s.potential, 0.21, n);
    for (const auto& [w, p] : t.probs) {
      std::vector<int> word(w.begin(), w.end());
      CHECK(std::abs(p - oracle::chain_probability(chain, word)) < 1e-8);
    }
  }
}

TEST_CASE("zero potential on example5 agrees with transfer counts") {
  Scenario s = build_example5();
  for (double omega : {0.1, 0.3, 0.62, 0.9}) {
    auto allowed = [&](long i, int u, int v) { return s.sft.allowed(omega, i, static_cast<Symbol>(u), static_cast<Symbol>(v)); };
    for (const char* text : {"12", "33", "213", "1223"}) {
      Word w = parse_word(text);
      std::vector<int> iw(w.begin(), w.end());
      double expected = oracle::counting_measure(3, allowed, iw, 200);
      CHECK(cylinder_measure(s.sft, s.potential, omega, w).probability == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("normalization, additivity and equivariance") {
  for (const char* psi : {"zero", "tilted"}) {
    Scenario s = build_example5(kDefaultAngle, psi);
    for (double omega : {0.05, 0.3, 0.55, 0.8}) {
      FiberChain here = converged_chain(s.sft, s.potential, omega, 8);
      FiberChain there = converged_chain(s.sft, s.potential, s.sft.base().point(omega, 1), 7);
      for (std::size_t n = 1; n <= 7; ++n) {
        CylinderMeasureTable t = measure_table(here, s.sft, 0, n);
        CHECK(t.total() == doctest::Approx(1.0).epsilon(1e-12));
        CylinderMeasureTable shifted = measure_table(there, s.sft, 0, n);
        for (const auto& [w, p] : shifted.probs) {
          double sum = 0.0;
          for (Symbol a = 0; a < 3; ++a) {
            Word aw{a};
            aw.insert(aw.end(), w.begin(), w.end());
            if (is_admissible(s.sft, omega, aw)) sum += here.cylinder(0, aw);
          }
          CHECK(std::abs(sum - p) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("inadmissible cylinders have zero measure") {
  Scenario s = build_example5(kDefaultAngle, "tilted");
  CHECK(cylinder_measure(s.sft, s.potential, 0.8, Word{0, 1}).probability == 0.0);
  CHECK(cylinder_measure(s.sft, s.potential, 0.3, Word{0, 1}).probability > 0.0);
}

TEST_CASE("burn-in doubling converges and reports failure") {
  Scenario s = build_example5(kDefaultAngle, "tilted");
  FiberChain c = converged_chain(s.sft, s.potential, 0.1, 6);
  CHECK(c.burn_in() >= 8);
  EngineOptions tight;
  tight.tol = 1e-16;
  tight.initial_burn_in = 2;
  tight.max_burn_in = 4;
  CHECK_THROWS_AS(converged_chain(s.sft, s.potential, 0.1, 6, tight), ConvergenceError);
}

TEST_CASE("birkhoff weight") {
  Potential psi = Potential::constant_pair({{0.5, 0.0}, {0.0, 1.0}});
  Scenario s = build_markov_oracle({{1.0, 1.0}, {1.0, 1.0}});
  CHECK(birkhoff_weight(s.sft, psi, 0.2, Word{0, 0, 1, 1}) == doctest::Approx(std::exp(0.5 + 0.0 + 1.0)));
}

TEST_CASE("sampled paths follow the chain") {
  Scenario s = build_markov_oracle({{2.0, 1.0}, {1.0, 3.0}});
  std::mt19937_64 rng(5);
  std::size_t ones = 0, total = 0;
  for (int i = 0; i < 400; ++i) {
    Word w = sample_path(s.sft, s.potential, 0.4, 50, rng);
    for (Symbol x : w) ones += x;
    total += w.size();
  }
  double expected = s.oracle->pi[1];
  CHECK(std::abs(static_cast<double>(ones) / total - expected) < 0.02);
}

TEST_CASE("line fit") {
  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
}

TEST_CASE("epsilon decay") {
  Scenario b = build_bernoulli_oracle(3);
  auto grid = quadrature_grid(IntervalPartition(), 2);
  DecaySeries d = epsilon_decay(b.sft, b.potential, 2, 6, grid);
  for (std::size_t i = 0; i < d.n.size(); ++i) CHECK(d.epsilon[i] == doctest::Approx(std::pow(3.0, -static_cast<double>(d.n[i]))));
  CHECK(d.fit.slope == doctest::Approx(-std::log(3.0)));

  Scenario s = build_example5();
  auto g5 = quadrature_grid(refine(s.sft.partition(), s.sft.base(), 4), 2);
  DecaySeries e = epsilon_decay(s.sft, s.potential, 2, 10, g5);
  for (std::size_t i = 1; i < e.epsilon.size(); ++i) CHECK(e.epsilon[i] <= e.epsilon[i - 1]);
  CHECK(e.fit.slope < 0.0);
  CHECK(e.fit.r_squared > 0.95);
}

TEST_CASE("max cylinder measure matches the table maximum") {
  Scenario s = build_example5(kDefaultAngle, "tilted");
  FiberChain c = converged_chain(s.sft, s.potential, 0.43, 8);
  for (std::size_t n = 1; n <= 6; ++n) {
    CylinderMeasureTable t = measure_table(c, s.sft, 1, n);
    double best = 0.0;
    for (const auto& [w, p] : t.probs) best = std::max(best, p);
    CHECK(max_cylinder_measure(c, 1, n) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("distortion constant") {
  Scenario b = build_bernoulli_oracle(3);
  CHECK(distortion_constant(b.sft, b.potential, 0.1, 2, 3) == doctest::Approx(1.0));
  Scenario s = build_example5(kDefaultAngle, "tilted");
  double c = distortion_constant(s.sft, s.potential, 0.1, 2, 2);
  CHECK(c >= 1.0);
  CHECK(std::isfinite(c));
}

TEST_CASE("marginal cylinder measure of (1,2) lives on I") {
  Scenario s = build_example5();
  Estimate e = marginal_cylinder_measure(s.sft, s.potential, Word{0, 1}, refine(s.sft.partition(), s.sft.base(), 4), 4);
  CHECK(e.value > 0.0);
  CHECK(e.error < 1e-3);
}
