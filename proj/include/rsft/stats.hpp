#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rsft/gibbs.hpp"
#include "rsft/process.hpp"
#include "rsft/sft.hpp"

namespace rsft {

// ---------------------------------------------------------------------------
// Reports

/// Where a check's target value comes from.
enum class TargetKind { kBound, kLimit, kOracle, kExact };
const char* to_string(TargetKind kind);

struct ReportEntry {
  std::string name;
  std::vector<double> values;  // first element is the headline value
  double target = 0.0;
  TargetKind target_kind = TargetKind::kExact;
  double tolerance = 0.0;
  bool passed = false;
  bool applicable = true;
  std::string note;
};

struct VerificationReport {
  std::vector<ReportEntry> entries;

  void add(ReportEntry entry) { entries.push_back(std::move(entry)); }
  /// All applicable entries pass.
  bool all_passed() const;
};

// ---------------------------------------------------------------------------
// Monte-Carlo harness

struct MCConfig {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Independent generator for sample `index`; depends only on (seed, index), never on the worker.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index);

/// Runs body(i) for i in [0, count) on `workers` threads with a static partition.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      std::size_t lo = count * w / workers, hi = count * (w + 1) / workers;
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  for (auto& t : pool) t.join();
}

/// Hit indices k in [1, horizon] of sampled paths (one vector per sample), with the option of
/// stopping each path at its first hit.
std::vector<std::vector<std::uint32_t>> simulate_hits(const FiberChain& chain, const CylinderSet& a,
                                                      std::size_t horizon, const MCConfig& mc,
                                                      bool first_only = false);

PointProcessRealization realization_from_hits(const TimeChange& tc, std::span<const std::uint32_t> hits);

// ---------------------------------------------------------------------------
// Exact window events

/// Requirement on the depth-n window starting at a given offset.
struct WindowConstraint {
  std::size_t offset;
  bool in_set;
};

/// mu_{theta^t omega} of the event that every listed window lies in (or outside) A, by a
/// forward pass over the chain with the last max(n-1, 1) symbols as state.
double window_event_probability(const FiberChain& chain, std::size_t t, const CylinderSet& a,
                                std::span<const WindowConstraint> constraints);

/// mu(F(I)) and mu(A cap F(I)) where F(I) = {no window of A at offsets in I}.
struct AvoidanceMeasures {
  double avoid = 0.0;
  double in_a_and_avoid = 0.0;
};
AvoidanceMeasures avoidance_measures(const FiberChain& chain, std::size_t t, const CylinderSet& a,
                                     std::span<const std::size_t> offsets);

/// Delta_{theta^t omega}(A, k): sup over I subset of {1..k} of |mu(A cap F(I)) - mu(A) mu(F(I))|.
/// With `gap` set, only I subset of (gap, k] (and 0 when gap >= k).
double brute_delta(const FiberChain& chain, std::size_t t, const CylinderSet& a, std::size_t k,
                   std::optional<std::size_t> gap = std::nullopt);
double brute_delta(const RandomSFT& sft, const Potential& psi, double omega, const CylinderSet& a, std::size_t k,
                   const EngineOptions& options = {});

inline constexpr std::size_t kMaxDeltaHorizon = 12;

struct GhkTerms {
  double g = 0.0;
  double k = 0.0;
  double h_bound = 0.0;
  std::optional<double> h_exact;
};

/// G, K exact; H as phi * T^k (phi supplied by the caller); H exact by brute force when
/// `exact_h` is set.
GhkTerms ghk_terms(const FiberChain& chain, const CylinderSet& a, std::size_t k, std::size_t g, double phi,
                   bool exact_h = false);

/// Probability that no window of A starts at any offset in `offsets` (the absorption oracle).
double no_hit_probability(const FiberChain& chain, const CylinderSet& a, std::span<const std::size_t> offsets);

/// Exact mu_omega(tau > k) for k = 0 .. k_max.
std::vector<double> exact_survival(const FiberChain& chain, const CylinderSet& a, std::size_t k_max);

// ---------------------------------------------------------------------------
// Checks

ReportEntry check_k1_exact(const TimeChange& tc, const WindowConstants& wc, const IntervalUnion& r);

/// K <= g eps(A) sup R, with k = k*.
ReportEntry check_k_bound(const GhkTerms& terms, std::size_t g, double epsilon, double sup_r);

/// sum_i Delta_{theta^i}(A, k - i) <= G + H + K with every term exact.
ReportEntry check_decomposition(const FiberChain& chain, const CylinderSet& a, std::size_t k, std::size_t g);

/// |P(N(R) = 0) - prod(1 - mu_j(A))| <= sum Delta terms with every term exact.
ReportEntry check_telescoping(const FiberChain& chain, const CylinderSet& a, const TimeChange& tc,
                              const IntervalUnion& r);

/// exp(-(1+2e) sum x) <= prod(1 - x_i) <= exp(-(1-2e) sum x) for xs in [0, e], e <= 1/2.
bool product_inequality_check(std::span<const double> xs, double epsilon);

struct Proportion {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;
};

/// 95% Wilson score interval.
Proportion wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct ZeroProbability {
  Proportion mc;
  double oracle = 0.0;  // exact finite-n void probability
  double limit = 0.0;   // exp(-Leb(R))
};

ZeroProbability mc_zero_probability(const HittingSetup& setup, const CylinderSet& a, const IntervalUnion& r,
                                    const MCConfig& mc);

struct ExpLawResult {
  std::size_t k_max = 0;
  double sup_distance = 0.0;
  std::size_t argmax = 0;
  std::vector<double> empirical_survival;  // k = 0 .. k_max
};

/// sup_k |P(tau > k) - exp(-T^k)| from `hitting` paths, k_max least with T^k >= target.
ExpLawResult exp_law_error(const HittingSetup& setup, const CylinderSet& a, const MCConfig& mc,
                           double target = 5.0);
/// Same comparison with an exact survival curve in place of the Monte-Carlo estimate.
double exp_law_error_exact(const HittingSetup& setup, const CylinderSet& a, double target = 5.0);

struct PhiSeries {
  std::vector<std::size_t> gaps;
  std::vector<double> phi;
  LinearFit fit;  // ln phi against g
};

/// phi(g) = max over n-words A, m-words B of |mu(A cap sigma^{-g-n} B) - mu(A) mu_{theta^{n+g}}(B)| / mu(A).
PhiSeries estimate_phi(const RandomSFT& sft, const Potential& psi, double omega, std::size_t n, std::size_t m,
                       std::span<const std::size_t> gaps, const EngineOptions& options = {});
PhiSeries estimate_phi(const FiberChain& chain, std::size_t n, std::size_t m, std::span<const std::size_t> gaps);

struct BetaSeries {
  std::vector<std::size_t> j;        // return lags
  std::vector<double> beta0;         // beta0[j]
  std::vector<std::size_t> n;        // cylinder depths
  std::vector<double> beta1;         // beta1[n]
  std::optional<LinearFit> fit0;     // ln beta0 against j (positive entries)
  std::optional<LinearFit> fit1;     // ln beta1 against n
  std::size_t skipped = 0;           // (omega, n) pairs with negligible mu(C_n(y))
};

BetaSeries estimate_beta(const RandomSFT& sft, const Potential& psi, std::span<const QuadratureNode> grid,
                         std::span<const Symbol> y, std::size_t n_min, std::size_t n_max,
                         const EngineOptions& options = {});

inline constexpr double kNegligibleMeasure = 1e-14;

// ---------------------------------------------------------------------------
// Poisson oracle and goodness of fit

PointProcessRealization sample_uniform_ppp(double horizon, std::mt19937_64& rng);

struct GofResult {
  std::vector<double> chi2_p;         // per interval, Poisson(Leb(R_i)) histogram
  std::vector<double> dispersion;     // per interval variance / mean
  double total_dispersion = 0.0;      // counts in all of R
  std::vector<double> independence_p; // per interval pair
  std::vector<std::string> warnings;
  bool passed = false;           // dispersion bands and pairwise independence
  bool marginal_passed = false;  // every chi2_p above the threshold; sensitive to finite-n bias
};

struct GofThresholds {
  double p_value = 0.01;
  double dispersion_band = 0.1;
};

/// counts[s][i] = points of realization s in R_i.
GofResult poisson_gof(std::span<const std::vector<std::size_t>> counts, const IntervalUnion& r,
                      const GofThresholds& thresholds = {});

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

}  // namespace rsft
