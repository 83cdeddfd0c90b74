#include "rsft/base.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsft {

double frac(double x) {
  double f = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  return f >= 1.0 ? 0.0 : f;
}

namespace {

bool has_short_period(double angle) {
  for (std::int64_t q = 1; q <= BaseRotation::kMaxGuardDenominator; ++q) {
    double qa = static_cast<double>(q) * angle;
    if (std::abs(qa - std::nearbyint(qa)) < 1e-12) return true;
  }
  return false;
}

}  // namespace

BaseRotation::BaseRotation(double angle, std::string label) : angle_(angle), label_(std::move(label)) {
  if (!(angle > 0.0 && angle < 1.0)) throw DomainError("rotation angle must lie in (0, 1)");
  if (has_short_period(angle))
    throw DomainError("rotation angle is rational with a small denominator (period <= 10^6)");
}

double BaseRotation::point(double omega, std::int64_t i) const {
  // i * angle split into an exactly representable head and its rounding error.
  double n = static_cast<double>(i);
  double head = n * angle_;
  double tail = std::fma(n, angle_, -head);
  return frac(frac(head) + (omega + tail));
}

std::vector<double> orbit(const BaseRotation& base, double omega, std::size_t k) {
  if (!(omega >= 0.0 && omega < 1.0)) throw DomainError("orbit: omega must lie in [0, 1)");
  std::vector<double> out(k + 1);
  for (std::size_t i = 0; i <= k; ++i) out[i] = base.point(omega, static_cast<std::int64_t>(i));
  out[0] = omega;
  return out;
}

IntervalPartition::IntervalPartition() : breakpoints_{0.0} {}

IntervalPartition::IntervalPartition(std::vector<double> breakpoints) : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.empty() || breakpoints_.front() != 0.0)
    throw DomainError("partition breakpoints must start at 0");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] >= 0.0 && breakpoints_[i] < 1.0))
      throw DomainError("partition breakpoints must lie in [0, 1)");
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1]))
      throw DomainError("partition breakpoints must be strictly increasing");
  }
}

std::size_t IntervalPartition::cell_of(double omega) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), omega);
  return static_cast<std::size_t>(std::distance(breakpoints_.begin(), it)) - 1;
}

IntervalPartition refine(const IntervalPartition& partition, const BaseRotation& base, std::size_t k) {
  std::vector<double> points(partition.breakpoints().begin(), partition.breakpoints().end());
  for (std::size_t i = 1; i < k; ++i)
    for (double b : partition.breakpoints()) points.push_back(base.point(b, -static_cast<std::int64_t>(i)));
  for (double& p : points)
    if (p > 1.0 - kBreakpointTolerance) p = 0.0;
  std::sort(points.begin(), points.end());
  std::vector<double> merged;
  merged.reserve(points.size());
  for (double p : points)
    if (merged.empty() || p - merged.back() > kBreakpointTolerance) merged.push_back(p);
  merged.front() = 0.0;
  return IntervalPartition(std::move(merged));
}

std::vector<QuadratureNode> quadrature_grid(const IntervalPartition& partition,
                                            std::size_t points_per_cell) {
  if (points_per_cell == 0) throw DomainError("quadrature_grid: points_per_cell must be >= 1");
  std::vector<QuadratureNode> nodes;
  nodes.reserve(partition.size() * points_per_cell);
  double total = 0.0;
  for (std::size_t c = 0; c < partition.size(); ++c) {
    double lo = partition.cell_begin(c);
    double width = partition.cell_end(c) - lo;
    double h = width / static_cast<double>(points_per_cell);
    for (std::size_t j = 0; j < points_per_cell; ++j) {
      nodes.push_back({lo + (static_cast<double>(j) + 0.5) * h, h});
      total += h;
    }
  }
  nodes.back().weight += 1.0 - total;
  return nodes;
}

std::vector<Convergent> convergents(double x, std::int64_t max_denominator) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("convergents: x must lie in (0, 1)");
  // x is exactly num / den with den a power of two; run Euclid on that exact rational.
  int exponent = 0;
  double mantissa = std::frexp(x, &exponent);
  constexpr int kBits = std::numeric_limits<double>::digits;
  auto num = static_cast<unsigned __int128>(std::ldexp(mantissa, kBits));
  unsigned __int128 den = static_cast<unsigned __int128>(1) << (kBits - exponent);

  std::vector<Convergent> out;
  __int128 p_prev = 1, p_prev2 = 0, q_prev = 0, q_prev2 = 1;
  while (den != 0) {
    auto a = static_cast<__int128>(num / den);
    unsigned __int128 rem = num % den;
    __int128 p = a * p_prev + p_prev2;
    __int128 q = a * q_prev + q_prev2;
    if (q > max_denominator) break;
    if (q > 0) out.push_back({static_cast<std::int64_t>(p), static_cast<std::int64_t>(q)});
    p_prev2 = p_prev;
    p_prev = p;
    q_prev2 = q_prev;
    q_prev = q;
    num = den;
    den = rem;
  }
  return out;
}

std::vector<std::int64_t> half_turn_sequence(const BaseRotation& base, std::size_t count) {
  auto distance = [&](std::int64_t k) { return std::abs(base.point(0.0, k) - 0.5); };
  std::vector<std::int64_t> out;
  double best = std::numeric_limits<double>::infinity();
  for (const Convergent& c : convergents(base.angle(), std::int64_t{1} << 40)) {
    if (out.size() == count) break;
    if (c.p % 2 == 0 || c.q % 2 != 0) continue;
    std::int64_t k = c.q / 2;
    if ((out.empty() || k > out.back()) && distance(k) < best) {
      out.push_back(k);
      best = distance(k);
    }
  }
  constexpr std::int64_t kScanLimit = 10'000'000;
  for (std::int64_t k = out.empty() ? 1 : out.back() + 1; out.size() < count && k <= kScanLimit; ++k) {
    double d = distance(k);
    if (d < best) {
      out.push_back(k);
      best = d;
    }
  }
  return out;
}

}  // namespace rsft
