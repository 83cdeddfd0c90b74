#include "rsft/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsft {

IntervalUnion::IntervalUnion(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  if (intervals_.empty()) throw DomainError("interval union must contain at least one interval");
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const Interval& iv = intervals_[i];
    if (!(iv.lo >= 0.0 && iv.lo < iv.hi && std::isfinite(iv.hi))) {
      std::ostringstream msg;
      msg << "interval " << i << " (" << iv.lo << ", " << iv.hi << ") must satisfy 0 <= lo < hi < inf";
      throw DomainError(msg.str());
    }
    if (i > 0 && intervals_[i - 1].hi > iv.lo) {
      std::ostringstream msg;
      msg << "intervals " << i - 1 << " (" << intervals_[i - 1].lo << ", " << intervals_[i - 1].hi << ") and " << i
          << " (" << iv.lo << ", " << iv.hi << ") overlap or are out of order";
      throw DomainError(msg.str());
    }
  }
}

double IntervalUnion::lebesgue() const {
  double total = 0.0;
  for (const Interval& iv : intervals_) total += iv.hi - iv.lo;
  return total;
}

double TimeChange::max_step() const {
  return masses.size() > 1 ? *std::max_element(masses.begin() + 1, masses.end()) : 0.0;
}

double TimeChange::min_step() const {
  return masses.size() > 1 ? *std::min_element(masses.begin() + 1, masses.end()) : 0.0;
}

TimeChange time_change(const FiberChain& chain, const CylinderSet& a, std::size_t horizon) {
  if (horizon == 0) throw DomainError("time_change: horizon must be >= 1");
  if (horizon + a.depth() > chain.length()) throw DomainError("time_change: fiber chain too short for the horizon");
  TimeChange tc;
  tc.omega = chain.omega();
  tc.depth = a.depth();
  tc.masses.resize(horizon + 1);
  tc.partial.assign(horizon + 1, 0.0);
  for (std::size_t k = 0; k <= horizon; ++k) tc.masses[k] = chain.cylinder_set(k, a);
  for (std::size_t k = 1; k <= horizon; ++k) tc.partial[k] = tc.partial[k - 1] + tc.masses[k];
  return tc;
}

TimeChange time_change(const RandomSFT& sft, const Potential& psi, double omega, const CylinderSet& a,
                       std::size_t horizon, const EngineOptions& options) {
  FiberChain chain = converged_chain(sft, psi, omega, horizon + a.depth(), options);
  return time_change(chain, a, horizon);
}

HittingSetup prepare_hitting(const RandomSFT& sft, const Potential& psi, double omega, const CylinderSet& a,
                             double target, const EngineOptions& options, std::size_t max_horizon) {
  std::size_t horizon = 64;
  while (true) {
    FiberChain chain = converged_chain(sft, psi, omega, horizon + a.depth(), options);
    TimeChange tc = time_change(chain, a, horizon);
    if (tc.partial.back() > target + tc.max_step()) return {std::move(chain), std::move(tc)};
    if (horizon >= max_horizon) {
      std::ostringstream msg;
      msg << "time change stays below " << target << " up to horizon " << horizon << " (T^K = " << tc.partial.back()
          << ")";
      throw HorizonError(msg.str());
    }
    horizon = std::min(2 * horizon, max_horizon);
  }
}

WindowConstants window_constants(const TimeChange& tc, const IntervalUnion& r) {
  if (!(tc.partial.back() > r.sup())) {
    std::ostringstream msg;
    msg << "time change horizon too short: T^K = " << tc.partial.back() << " <= sup R = " << r.sup()
        << "; extend K";
    throw HorizonError(msg.str());
  }
  // Number of k >= 1 with T^k <= x; T is nondecreasing so this is max{k >= 1 : T^k <= x}.
  auto last_below = [&](double x) {
    auto it = std::upper_bound(tc.partial.begin() + 1, tc.partial.end(), x);
    return static_cast<std::size_t>(std::distance(tc.partial.begin() + 1, it));
  };
  WindowConstants wc;
  for (const Interval& iv : r.intervals()) {
    std::size_t p = last_below(iv.lo);
    std::size_t top = last_below(iv.hi);
    wc.p.push_back(p);
    wc.q.push_back(top - p);
    wc.k_star = std::max(wc.k_star, top);
  }
  return wc;
}

PointProcessRealization realize_process(const TimeChange& tc, const CylinderSet& a, std::span<const Symbol> x) {
  std::size_t horizon = tc.horizon();
  std::size_t n = a.depth();
  if (x.size() < horizon + n) throw DomainError("realize_process: sampled word shorter than K + depth(A)");
  PointProcessRealization re;
  for (std::size_t k = 1; k <= horizon; ++k)
    if (a.contains(x.subspan(k, n))) re.times.push_back(tc.partial[k]);
  return re;
}

std::vector<std::size_t> counts_in(const PointProcessRealization& re, const IntervalUnion& r) {
  std::vector<std::size_t> counts;
  counts.reserve(r.size());
  for (const Interval& iv : r.intervals()) {
    auto lo = std::upper_bound(re.times.begin(), re.times.end(), iv.lo);
    auto hi = std::lower_bound(re.times.begin(), re.times.end(), iv.hi);
    counts.push_back(hi > lo ? static_cast<std::size_t>(hi - lo) : 0);
  }
  return counts;
}

std::optional<std::size_t> first_hitting(std::span<const Symbol> x, const CylinderSet& a, std::size_t k_max) {
  std::size_t n = a.depth();
  for (std::size_t k = 1; k <= k_max && k + n <= x.size(); ++k)
    if (a.contains(x.subspan(k, n))) return k;
  return std::nullopt;
}

}  // namespace rsft
