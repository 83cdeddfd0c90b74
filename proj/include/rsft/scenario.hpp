#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsft/base.hpp"
#include "rsft/gibbs.hpp"
#include "rsft/process.hpp"
#include "rsft/sft.hpp"
#include "rsft/stats.hpp"

namespace rsft {

/// Stationary Markov chain with closed-form cylinder probabilities pi_{w_0} prod P_{w_i w_{i+1}}.
struct StationaryChain {
  std::vector<double> pi;
  std::vector<std::vector<double>> p;
  double second_eigenvalue = 0.0;  // |lambda_2| / lambda_1 of the weight matrix

  double probability(std::span<const Symbol> word) const;
};

/// Perron data of a positive 2x2 weight matrix by the explicit quadratic formula.
StationaryChain markov_closed_form(const std::vector<std::vector<double>>& weights);

struct Scenario {
  std::string name;
  RandomSFT sft;
  Potential potential;
  Word word;  // designated test word y (a long prefix; y_n is its first n symbols)
  bool nonperiodic = false;
  std::string notes;
  std::optional<StationaryChain> oracle;  // omega-independent closed form, when one exists
  double oracle_tolerance = 0.0;
};

/// The 3-symbol system with Q(omega) built from I = [0, 3/4) and J = [0, 1/4) u [1/2, 1).
/// `psi` is "zero" or "tilted" (a nonconstant locally constant potential respecting the
/// omega -> omega + 1/2, 1 <-> 3 symmetry).
Scenario build_example5(double r = kDefaultAngle, const std::string& psi = "zero");

inline constexpr double kTiltAlpha = 0.3;
inline constexpr double kTiltBeta = 0.4;
inline constexpr double kTiltGamma = 0.2;

Scenario build_bernoulli_oracle(std::size_t b);
/// Two symbols, all transitions allowed, psi(u, v) = ln weights[u][v].
Scenario build_markov_oracle(const std::vector<std::vector<double>>& weights);

/// Scenario by built-in name: "example5", "example5-tilted", "bernoulli", "markov".
Scenario builtin_scenario(const std::string& name);

/// Marker symbol b followed by the Fibonacci word over {1, 2} (a -> 2, b -> 1); for b = 2, the
/// marker 2 followed by 1s. The marker appears once, so q_n = n for every prefix.
Word designated_word(std::size_t alphabet_size, std::size_t length);
/// Prefix of the Fibonacci word abaab... over the two given symbols.
Word fibonacci_word(std::size_t length, Symbol a = 1, Symbol b = 0);

/// Symbol involution s -> b - 1 - s (1 <-> 3 for b = 3).
Word swap_word(std::span<const Symbol> word, std::size_t alphabet_size);

/// A cell of refine(partition, |w|) of positive length on which w is admissible, if any.
std::optional<Interval> positive_measure_cell(const RandomSFT& sft, std::span<const Symbol> word);

/// Whether Q(omega + 1/2) = U Q(omega) U and psi(omega + 1/2, u'v') = psi(omega, uv) for every omega,
/// checked on every cell of the common refinement of both partitions and their half-turn shifts.
bool respects_symmetry(const Scenario& scenario);

/// max over grid omega, depths 1..n and admissible words w of |mu_omega(C_n(w)) - mu_{omega+1/2}(C_n(w'))|.
ReportEntry symmetry_check(const Scenario& scenario, std::size_t n, std::span<const QuadratureNode> grid,
                           double tol = 1e-6, const EngineOptions& options = {});

struct NonmixingOptions {
  Word word{0, 1};                  // the pair (1, 2)
  std::size_t refine_depth = 6;     // partition refinement for the quadrature grid
  std::size_t points_per_cell = 16; // coarse resolution; the fine grid doubles it
  std::size_t approach_terms = 6;   // number of k_i
  EngineOptions engine{};
};

struct NonmixingResult {
  double mu = 0.0;       // integral of mu_omega(C(x)), fine grid
  double j = 0.0;        // integral of mu_omega(C(x))^2, fine grid
  double gap = 0.0;      // j - mu^2
  double quadrature_error = 0.0;
  double support_measure = 0.0;  // Lebesgue measure of {omega : mu_omega(C(x)) > 0}, fine grid
  std::vector<std::int64_t> k;
  std::vector<double> correlation;         // integral mu_omega(C(x)) mu_{omega+1/2+k r}(C(x))
  std::vector<double> direct_correlation;  // integral mu_omega(C(x)) mu_{theta^k omega}(C(x'))
  std::vector<std::string> warnings;
};

NonmixingResult nonmixing_gap(const Scenario& scenario, const NonmixingOptions& options = {});
/// Jensen gap positive with margin >= 10x quadrature error and the last correlation closer to J
/// than to mu^2.
ReportEntry nonmixing_entry(const NonmixingResult& result);

}  // namespace rsft
