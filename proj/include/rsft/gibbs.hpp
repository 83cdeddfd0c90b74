#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "rsft/base.hpp"
#include "rsft/sft.hpp"

namespace rsft {

/// Locally constant potential psi(omega, x) reading `depth` coordinates (1 or 2),
/// piecewise constant in omega.
///
/// Values are stored per partition cell as a row-major table over words of length
/// `depth`. The Hoelder constants (a, r) bound the variation on n-cylinders by a r^n;
/// for locally constant potentials the variation vanishes beyond `depth`.
class Potential {
 public:
  Potential(std::size_t alphabet_size, std::size_t depth, IntervalPartition partition,
            std::vector<std::vector<double>> cell_values, double holder_a = 0.0, double holder_r = 0.5);

  static Potential zero(std::size_t alphabet_size);
  /// omega-independent two-coordinate potential psi(u, v) = values[u][v].
  static Potential constant_pair(const std::vector<std::vector<double>>& values);

  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t depth() const { return depth_; }
  const IntervalPartition& partition() const { return partition_; }
  std::span<const std::vector<double>> cell_values() const { return cell_values_; }
  double holder_a() const { return holder_a_; }
  double holder_r() const { return holder_r_; }

  /// psi(omega, u v ...), only the first `depth` symbols are read.
  double value(double omega, Symbol u, Symbol v) const;

 private:
  std::size_t alphabet_size_;
  std::size_t depth_;
  IntervalPartition partition_;
  std::vector<std::vector<double>> cell_values_;
  double holder_a_;
  double holder_r_;
};

struct EngineOptions {
  double tol = 1e-12;
  std::size_t initial_burn_in = 8;
  std::size_t max_burn_in = 4096;
  std::size_t max_word_length = 14;
  std::size_t word_cap = kDefaultWordCap;
};

/// exp(sum_{i<n} psi(theta^i omega, w_i w_{i+1} ...)) for a word of length n + depth - 1.
double birkhoff_weight(const RandomSFT& sft, const Potential& psi, double omega, std::span<const Symbol> word);

/// Finite-volume approximation of the sample measures mu_{theta^t omega}, t = 0 .. length-1,
/// as a non-homogeneous Markov chain.
///
/// The chain is the marginal on positions [0, length) of the Birkhoff-weighted measure on
/// admissible words over [-burn_in, length + burn_in), i.e. flat boundary conditions on both
/// sides. The sample measure of an n-cylinder at position t is
///   marginal(t, w_0) * prod_j transition(t + j, w_j, w_{j+1}),
/// and marginal(t + 1) = marginal(t) * transition(t) holds exactly, so the family is
/// equivariant by construction.
class FiberChain {
 public:
  FiberChain(const RandomSFT& sft, const Potential& psi, double omega, std::size_t length, std::size_t burn_in);

  double omega() const { return omega_; }
  std::size_t length() const { return length_; }
  std::size_t alphabet_size() const { return b_; }
  std::size_t burn_in() const { return burn_in_; }

  double marginal(std::size_t t, Symbol u) const { return marginals_[t * b_ + u]; }
  /// P(x_{t+1} = v | x_t = u); defined for t + 1 < length.
  double transition(std::size_t t, Symbol u, Symbol v) const { return transitions_[(t * b_ + u) * b_ + v]; }
  std::span<const double> marginal_row(std::size_t t) const { return {marginals_.data() + t * b_, b_}; }
  std::span<const double> transition_row(std::size_t t, Symbol u) const {
    return {transitions_.data() + (t * b_ + u) * b_, b_};
  }

  /// mu_{theta^t omega}(C_n(w)); requires t + n <= length.
  double cylinder(std::size_t t, std::span<const Symbol> word) const;
  /// mu_{theta^t omega}(A).
  double cylinder_set(std::size_t t, const CylinderSet& set) const;

  /// Largest entry-wise difference of marginals and transitions against another chain.
  double distance(const FiberChain& other) const;

 private:
  double omega_;
  std::size_t length_;
  std::size_t b_;
  std::size_t burn_in_;
  std::vector<double> marginals_;
  std::vector<double> transitions_;
};

/// Doubles the burn-in from options.initial_burn_in until successive chains agree within
/// options.tol; throws ConvergenceError past options.max_burn_in.
FiberChain converged_chain(const RandomSFT& sft, const Potential& psi, double omega, std::size_t length,
                           const EngineOptions& options = {});

struct CylinderMeasure {
  double probability = 0.0;
  std::size_t burn_in = 0;
};

/// mu_omega(C_n(w)); exactly 0 for words that are not admissible at omega.
CylinderMeasure cylinder_measure(const RandomSFT& sft, const Potential& psi, double omega,
                                 std::span<const Symbol> word, const EngineOptions& options = {});

/// mu_omega restricted to the n-cylinders.
struct CylinderMeasureTable {
  double omega = 0.0;
  std::size_t depth = 0;
  std::size_t burn_in = 0;
  double tol = 0.0;
  std::map<Word, double> probs;

  double total() const;
};

CylinderMeasureTable measure_table(const RandomSFT& sft, const Potential& psi, double omega, std::size_t n,
                                   const EngineOptions& options = {});
CylinderMeasureTable measure_table(const FiberChain& chain, const RandomSFT& sft, std::size_t t, std::size_t n,
                                   std::size_t cap = kDefaultWordCap);

/// Draws words from the chain; cumulative rows are precomputed once and shared read-only.
class PathSampler {
 public:
  explicit PathSampler(const FiberChain& chain);

  std::size_t length() const { return length_; }
  Symbol first(double u) const;
  Symbol next(std::size_t t, Symbol current, double u) const;

  template <class Rng>
  Word sample(Rng& rng, std::size_t length) const {
    Word out;
    out.reserve(length);
    out.push_back(first(uniform(rng)));
    for (std::size_t t = 0; t + 1 < length; ++t) out.push_back(next(t, out.back(), uniform(rng)));
    return out;
  }

  /// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
  template <class Rng>
  static double uniform(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }

 private:
  std::size_t length_;
  std::size_t b_;
  std::vector<double> first_cdf_;
  std::vector<double> cdf_;
};

/// A word of length L distributed according to the finite-volume approximation of mu_omega.
Word sample_path(const RandomSFT& sft, const Potential& psi, double omega, std::size_t length,
                 std::mt19937_64& rng, const EngineOptions& options = {});

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// integral of mu_omega(C(w)) over an explicit grid.
double marginal_cylinder_measure(const RandomSFT& sft, const Potential& psi, std::span<const Symbol> word,
                                 std::span<const QuadratureNode> grid, const EngineOptions& options = {});
/// Same on quadrature_grid(partition, points_per_cell); error is the difference against the
/// doubled grid (the doubled-grid value is returned).
Estimate marginal_cylinder_measure(const RandomSFT& sft, const Potential& psi, std::span<const Symbol> word,
                                   const IntervalPartition& partition, std::size_t points_per_cell,
                                   const EngineOptions& options = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct DecaySeries {
  std::vector<std::size_t> n;
  std::vector<double> epsilon;
  LinearFit fit;  // ln epsilon against n
};

/// max over a cylinder's words at omega; computed by a max-product pass over the chain.
double max_cylinder_measure(const FiberChain& chain, std::size_t t, std::size_t n);

/// epsilon(n) = max over grid nodes and admissible n-words of mu_omega(C_n(w)).
DecaySeries epsilon_decay(const RandomSFT& sft, const Potential& psi, std::size_t n_min, std::size_t n_max,
                          std::span<const QuadratureNode> grid, const EngineOptions& options = {});

/// Empirical distortion constant: max over (n+m)-words of max(ratio, 1/ratio) with
/// ratio = mu_omega(C_{n+m}(w)) / (mu_omega(C_n(w)) mu_{theta^n omega}(C_m(sigma^n w))).
/// Enumerates every admissible word when there are at most `max_words`, otherwise samples
/// `max_words` words from mu_omega using `seed`.
double distortion_constant(const RandomSFT& sft, const Potential& psi, double omega, std::size_t n,
                           std::size_t m, std::size_t max_words = 200'000, std::uint64_t seed = 1,
                           const EngineOptions& options = {});

}  // namespace rsft
