#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rsft/errors.hpp"

namespace rsft {

/// Fractional part in [0, 1).
double frac(double x);

/// Circle rotation theta(omega) = omega + angle mod 1 on [0, 1) with Lebesgue measure.
///
/// The angle must lie in (0, 1) and must not be (numerically) a rational with
/// denominator at most `kMaxGuardDenominator`; floating point numbers cannot be
/// irrational, so the guard only rules out short periods.
class BaseRotation {
 public:
  static constexpr std::int64_t kMaxGuardDenominator = 1'000'000;

  explicit BaseRotation(double angle, std::string label = {});

  double angle() const { return angle_; }
  const std::string& label() const { return label_; }

  /// theta^i(omega), evaluated directly as frac(omega + i * angle); i may be negative.
  double point(double omega, std::int64_t i) const;

 private:
  double angle_;
  std::string label_;
};

/// [omega, theta omega, ..., theta^k omega].
std::vector<double> orbit(const BaseRotation& base, double omega, std::size_t k);

/// Partition of [0, 1) into half-open cells [b_i, b_{i+1}).
class IntervalPartition {
 public:
  /// The trivial partition {[0, 1)}.
  IntervalPartition();
  explicit IntervalPartition(std::vector<double> breakpoints);

  std::size_t size() const { return breakpoints_.size(); }
  std::span<const double> breakpoints() const { return breakpoints_; }

  /// Index of the cell containing omega in [0, 1).
  std::size_t cell_of(double omega) const;
  double cell_begin(std::size_t cell) const { return breakpoints_[cell]; }
  double cell_end(std::size_t cell) const {
    return cell + 1 < breakpoints_.size() ? breakpoints_[cell + 1] : 1.0;
  }

  friend bool operator==(const IntervalPartition&, const IntervalPartition&) = default;

 private:
  std::vector<double> breakpoints_;
};

inline constexpr double kBreakpointTolerance = 1e-12;

/// sqrt(2) - 1.
inline constexpr double kDefaultAngle = std::numbers::sqrt2 - 1.0;

/// Coarsest partition on which omega -> (cell(omega), ..., cell(theta^{k-1} omega)) is constant.
IntervalPartition refine(const IntervalPartition& partition, const BaseRotation& base, std::size_t k);

struct QuadratureNode {
  double omega;
  double weight;
};

/// Midpoint rule with `points_per_cell` nodes in every cell; weights sum to one.
std::vector<QuadratureNode> quadrature_grid(const IntervalPartition& partition,
                                            std::size_t points_per_cell);

struct Convergent {
  std::int64_t p;
  std::int64_t q;
};

/// Continued-fraction convergents p/q of x in (0, 1) with q <= max_denominator.
std::vector<Convergent> convergents(double x, std::int64_t max_denominator);

/// Increasing k_1 < k_2 < ... with frac(k_i * angle) -> 1/2.
///
/// Uses convergents p/q with p odd and q even (then k = q/2 gives k * angle close to p/2);
/// falls back to a record-breaking scan when the expansion runs short of such convergents.
std::vector<std::int64_t> half_turn_sequence(const BaseRotation& base, std::size_t count);

}  // namespace rsft
