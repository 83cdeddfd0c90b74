#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rsft/gibbs.hpp"
#include "rsft/sft.hpp"

namespace rsft {

struct Interval {
  double lo;
  double hi;
};

/// Finite union of disjoint open bounded intervals in [0, inf), sorted.
class IntervalUnion {
 public:
  /// Throws DomainError naming the offending pair when intervals overlap or are out of order.
  explicit IntervalUnion(std::vector<Interval> intervals);

  std::span<const Interval> intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  double lebesgue() const;
  double sup() const { return intervals_.back().hi; }

 private:
  std::vector<Interval> intervals_;
};

/// Random time change T_omega^k(A) = sum_{i=1}^k mu_{theta^i omega}(A) for k = 0 .. K.
struct TimeChange {
  double omega = 0.0;
  std::size_t depth = 0;
  std::vector<double> masses;   // masses[k] = mu_{theta^k omega}(A), k = 0 .. K
  std::vector<double> partial;  // partial[k] = T^k, partial[0] = 0

  std::size_t horizon() const { return partial.size() - 1; }
  /// max_{1<=k<=K} mu_{theta^k omega}(A).
  double max_step() const;
  double min_step() const;
};

/// Time change read off a fiber chain of length >= K + depth(A) anchored at omega.
TimeChange time_change(const FiberChain& chain, const CylinderSet& a, std::size_t horizon);
TimeChange time_change(const RandomSFT& sft, const Potential& psi, double omega, const CylinderSet& a,
                       std::size_t horizon, const EngineOptions& options = {});

/// A chain long enough to sample paths for hitting statistics, and its time change.
struct HittingSetup {
  FiberChain chain;
  TimeChange time_change;
};

/// Extends the horizon K geometrically until T^K > target + max_step.
HittingSetup prepare_hitting(const RandomSFT& sft, const Potential& psi, double omega, const CylinderSet& a,
                             double target, const EngineOptions& options = {},
                             std::size_t max_horizon = 20'000'000);

struct WindowConstants {
  std::vector<std::size_t> p;
  std::vector<std::size_t> q;
  std::size_t k_star = 0;
};

/// p_i = max{k >= 1 : T^k <= inf R_i} (0 when the set is empty), q_i likewise for sup R_i
/// minus p_i, k* = max_i p_i + q_i. Throws HorizonError when T^K <= sup R.
WindowConstants window_constants(const TimeChange& tc, const IntervalUnion& r);

/// One realization of the hitting-time point process: sorted times T^k, 1 <= k <= K, at which
/// the length-depth window of x at offset k lies in A.
struct PointProcessRealization {
  std::vector<double> times;
};

PointProcessRealization realize_process(const TimeChange& tc, const CylinderSet& a, std::span<const Symbol> x);

/// Number of points in each open interval of R.
std::vector<std::size_t> counts_in(const PointProcessRealization& re, const IntervalUnion& r);

/// Least k in [1, k_max] with sigma^k x in A, if any (requires x long enough for the windows examined).
std::optional<std::size_t> first_hitting(std::span<const Symbol> x, const CylinderSet& a, std::size_t k_max);

}  // namespace rsft
