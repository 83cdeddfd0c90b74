#include <atomic>
#include <cmath>
#include <functional>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rsft/scenario.hpp"
#include "rsft/stats.hpp"

using namespace rsft;

namespace {

const oracle::Matrix kWeights{{2.0, 1.0}, {1.0, 3.0}};

/// Stationary-chain probability of an event on words of length `length`, by enumeration.
double enumerate(const oracle::PowerChain& c, int length, const std::function<bool(const std::vector<int>&)>& event) {
  double p = 0.0;
  for (const auto& w : oracle::all_words(2, length))
    if (event(w)) p += oracle::chain_probability(c, w);
  return p;
}

bool window_at(const std::vector<int>& x, std::size_t offset, const std::vector<int>& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (x[offset + i] != a[i]) return false;
  return true;
}

struct MarkovFixture {
  Scenario s = build_markov_oracle(kWeights);
  oracle::PowerChain power = oracle::power_chain(kWeights);
  std::vector<int> word{0, 1};
  CylinderSet a = CylinderSet::single(Word{0, 1});
  FiberChain chain = converged_chain(s.sft, s.potential, 0.27, 14);
};

}  // namespace

TEST_CASE("report helpers") {
  CHECK(std::string(to_string(TargetKind::kBound)) == "bound");
  VerificationReport r;
  ReportEntry skipped;
  skipped.applicable = false;
  r.add(skipped);
  CHECK(r.all_passed());
  ReportEntry bad;
  r.add(bad);
  CHECK_FALSE(r.all_passed());
}

TEST_CASE("streams depend only on seed and index") {
  auto a = make_stream(7, 3), b = make_stream(7, 3), c = make_stream(7, 4), d = make_stream(8, 3);
  auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<std::atomic<int>> hits(1001);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("window events against enumeration") {
  MarkovFixture f;
  std::vector<WindowConstraint> cs{{0, true}, {2, false}, {3, true}};
  double expected = enumerate(f.power, 5, [&](const std::vector<int>& x) {
    return window_at(x, 0, f.word) && !window_at(x, 2, f.word) && window_at(x, 3, f.word);
  });
  CHECK(window_event_probability(f.chain, 1, f.a, cs) == doctest::Approx(expected).epsilon(1e-8));

  std::vector<std::size_t> offsets{1, 2, 4, 5};
  double avoid = enumerate(f.power, 7, [&](const std::vector<int>& x) {
    for (auto o : offsets)
      if (window_at(x, o, f.word)) return false;
    return true;
  });
  double both = enumerate(f.power, 7, [&](const std::vector<int>& x) {
    if (!window_at(x, 0, f.word)) return false;
    for (auto o : offsets)
      if (window_at(x, o, f.word)) return false;
    return true;
  });
  AvoidanceMeasures m = avoidance_measures(f.chain, 0, f.a, offsets);
  CHECK(m.avoid == doctest::Approx(avoid).epsilon(1e-8));
  CHECK(m.in_a_and_avoid == doctest::Approx(both).epsilon(1e-8));
  CHECK(no_hit_probability(f.chain, f.a, offsets) == doctest::Approx(avoid).epsilon(1e-8));
}

TEST_CASE("brute Delta against enumeration") {
  MarkovFixture f;
  const std::size_t k = 4;
  double mu_a = oracle::chain_probability(f.power, f.word);
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    auto avoids = [&](const std::vector<int>& x) {
      for (std::size_t j = 1; j <= k; ++j)
        if ((mask >> (j - 1)) & 1u && window_at(x, j, f.word)) return false;
      return true;
    };
    double fi = enumerate(f.power, static_cast<int>(k) + 2, avoids);
    double af = enumerate(f.power, static_cast<int>(k) + 2,
                          [&](const std::vector<int>& x) { return window_at(x, 0, f.word) && avoids(x); });
    best = std::max(best, std::abs(af - mu_a * fi));
  }
  CHECK(brute_delta(f.chain, 2, f.a, k) == doctest::Approx(best).epsilon(1e-8));
  CHECK(brute_delta(f.chain, 2, f.a, k, k) == 0.0);
  CHECK(brute_delta(f.chain, 2, f.a, k, 1) <= brute_delta(f.chain, 2, f.a, k) + 1e-15);
}

TEST_CASE("G and K against enumeration") {
  MarkovFixture f;
  const std::size_t k = 5, g = 3;
  double mu_a = oracle::chain_probability(f.power, f.word);
  auto hit_by_g = [&](const std::vector<int>& x) {
    for (std::size_t j = 1; j <= g; ++j)
      if (window_at(x, j, f.word)) return true;
    return false;
  };
  double p_hit = enumerate(f.power, static_cast<int>(g) + 2, hit_by_g);
  double p_return = enumerate(f.power, static_cast<int>(g) + 2,
                              [&](const std::vector<int>& x) { return window_at(x, 0, f.word) && hit_by_g(x); });
  GhkTerms t = ghk_terms(f.chain, f.a, k, g, 0.0, true);
  CHECK(t.g == doctest::Approx(k * p_return).epsilon(1e-8));
  CHECK(t.k == doctest::Approx(k * mu_a * p_hit).epsilon(1e-8));
  REQUIRE(t.h_exact.has_value());
  CHECK(*t.h_exact >= 0.0);
}

TEST_CASE("exact survival against enumeration") {
  MarkovFixture f;
  std::vector<double> surv = exact_survival(f.chain, f.a, 8);
  REQUIRE(surv.size() == 9);
  CHECK(surv[0] == 1.0);
  for (std::size_t k = 1; k <= 8; ++k) {
    double expected = enumerate(f.power, static_cast<int>(k) + 2, [&](const std::vector<int>& x) {
      for (std::size_t j = 1; j <= k; ++j)
        if (window_at(x, j, f.word)) return false;
      return true;
    });
    CHECK(surv[k] == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("exact inequalities hold on random fibers") {
  for (const char* psi : {"zero", "tilted"}) {
    Scenario s = build_example5(kDefaultAngle, psi);
    CylinderSet a = CylinderSet::single(designated_word(3, 2));
    for (double omega : {0.05, 0.33, 0.71}) {
      FiberChain chain = converged_chain(s.sft, s.potential, omega, 20);
      for (std::size_t g = 0; g <= 6; ++g) CHECK(check_decomposition(chain, a, 6, g).passed);
      IntervalUnion r({{0.0, 0.5}});
      HittingSetup setup = prepare_hitting(s.sft, s.potential, omega, a, r.sup());
      CHECK(check_telescoping(setup.chain, a, setup.time_change, r).passed);
      WindowConstants wc = window_constants(setup.time_change, r);
      CHECK(check_k1_exact(setup.time_change, wc, r).passed);
    }
  }
}

TEST_CASE("K1 bound doubles with two intervals") {
  Scenario s = build_example5();
  CylinderSet a = CylinderSet::single(designated_word(3, 3));
  IntervalUnion one({{0.0, 1.0}}), two({{0.0, 1.0}, {1.5, 2.0}});
  HittingSetup setup = prepare_hitting(s.sft, s.potential, 0.1, a, two.sup());
  ReportEntry e1 = check_k1_exact(setup.time_change, window_constants(setup.time_change, one), one);
  ReportEntry e2 = check_k1_exact(setup.time_change, window_constants(setup.time_change, two), two);
  CHECK(e2.values[2] == doctest::Approx(2.0 * e1.values[2]));
}

TEST_CASE("product inequality") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    double eps = 0.5 * (1.0 - u(rng));
    std::vector<double> xs(1 + i % 40);
    for (double& x : xs) x = eps * u(rng);
    CHECK(product_inequality_check(xs, eps));
  }
}

TEST_CASE("Wilson interval and chi-square tail") {
  Proportion p = wilson_interval(50, 100);
  CHECK(p.lower == doctest::Approx(0.40383).epsilon(1e-4));
  CHECK(p.upper == doctest::Approx(0.59617).epsilon(1e-4));
  CHECK(wilson_interval(0, 10).lower == 0.0);
  CHECK(chi_square_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chi_square_sf(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
}

TEST_CASE("Monte-Carlo hits are deterministic and unbiased") {
  Scenario s = build_markov_oracle(kWeights);
  CylinderSet a = CylinderSet::single(Word{0, 1});
  FiberChain chain = converged_chain(s.sft, s.potential, 0.27, 40);
  MCConfig mc{4000, 99, 1};
  auto one = simulate_hits(chain, a, 30, mc);
  mc.workers = 4;
  auto four = simulate_hits(chain, a, 30, mc);
  CHECK(one == four);
  auto first = simulate_hits(chain, a, 30, mc, true);
  double total = 0.0;
  for (std::size_t i = 0; i < one.size(); ++i) {
    total += static_cast<double>(one[i].size());
    if (one[i].empty()) CHECK(first[i].empty());
    else CHECK(first[i] == std::vector<std::uint32_t>{one[i].front()});
  }
  double mu = s.oracle->probability(Word{0, 1});
  double mean = total / 4000.0;
  CHECK(std::abs(mean - 30.0 * mu) < 0.1);
}

TEST_CASE("uniform Poisson process passes the goodness-of-fit test") {
  IntervalUnion r({{0.0, 1.0}, {1.0, 2.0}, {2.5, 4.0}});
  std::vector<std::vector<std::size_t>> counts;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    auto rng = make_stream(2024, i);
    counts.push_back(counts_in(sample_uniform_ppp(5.0, rng), r));
  }
  GofResult g = poisson_gof(counts, r);
  CHECK(g.passed);
  CHECK(g.marginal_passed);
  CHECK(g.independence_p.size() == 3);
  for (double d : g.dispersion) CHECK(std::abs(d - 1.0) < 0.1);
  CHECK_THROWS_AS(poisson_gof(std::span(counts).first(10), r), DomainError);

  // Perfectly correlated counts fail independence.
  for (auto& c : counts) c[1] = c[0];
  CHECK_FALSE(poisson_gof(counts, r).passed);
}

TEST_CASE("phi decays at the second eigenvalue") {
  Scenario s = build_markov_oracle(kWeights);
  oracle::PowerChain power = oracle::power_chain(kWeights);
  double lambda2 = (kWeights[0][0] + kWeights[1][1]) - power.lambda;
  std::vector<std::size_t> gaps{0, 1, 2, 3, 4, 5, 6};
  PhiSeries p = estimate_phi(s.sft, s.potential, 0.2, 2, 2, gaps);
  CHECK(p.fit.slope == doctest::Approx(std::log(lambda2 / power.lambda)).epsilon(1e-6));
  CHECK(p.fit.r_squared > 0.999);

  Scenario b = build_bernoulli_oracle(3);
  PhiSeries zero = estimate_phi(b.sft, b.potential, 0.2, 2, 2, gaps);
  for (double v : zero.phi) CHECK(v < 1e-15);
}

TEST_CASE("return-time estimators decay") {
  Scenario s = build_example5(kDefaultAngle, "tilted");
  auto grid = quadrature_grid(refine(s.sft.partition(), s.sft.base(), 4), 2);
  BetaSeries b = estimate_beta(s.sft, s.potential, grid, s.word, 2, 8);
  REQUIRE(b.fit0.has_value());
  REQUIRE(b.fit1.has_value());
  CHECK(b.fit0->slope < 0.0);
  CHECK(b.fit1->slope < 0.0);
}

TEST_CASE("exact exponential-law distance shrinks with n") {
  Scenario s = build_example5();
  double prev = 1.0;
  for (std::size_t n : {3, 5, 7}) {
    CylinderSet a = CylinderSet::single(designated_word(3, n));
    HittingSetup setup = prepare_hitting(s.sft, s.potential, 0.1, a, 5.0);
    double d = exp_law_error_exact(setup, a, 5.0);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("Monte-Carlo zero probability covers the oracle") {
  Scenario s = build_bernoulli_oracle(3);
  CylinderSet a = CylinderSet::single(designated_word(3, 4));
  IntervalUnion r({{0.0, 1.0}});
  HittingSetup setup = prepare_hitting(s.sft, s.potential, 0.1, a, r.sup());
  ZeroProbability z = mc_zero_probability(setup, a, r, {4000, 3, 2});
  CHECK(z.oracle >= z.mc.lower);
  CHECK(z.oracle <= z.mc.upper);
  CHECK(z.limit == doctest::Approx(std::exp(-1.0)));
}
