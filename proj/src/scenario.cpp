#include "rsft/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsft {

double StationaryChain::probability(std::span<const Symbol> word) const {
  if (word.empty()) return 1.0;
  double p = pi[word[0]];
  for (std::size_t i = 0; i + 1 < word.size(); ++i) p *= this->p[word[i]][word[i + 1]];
  return p;
}

StationaryChain markov_closed_form(const std::vector<std::vector<double>>& weights) {
  if (weights.size() != 2 || weights[0].size() != 2 || weights[1].size() != 2)
    throw DomainError("markov oracle needs a 2x2 weight matrix");
  for (const auto& row : weights)
    for (double w : row)
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("markov oracle weights must be positive and finite");
  const double a = weights[0][0], b = weights[0][1], c = weights[1][0], d = weights[1][1];
  const double half_trace = 0.5 * (a + d);
  const double disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
  const double lambda = half_trace + disc;
  // (M - lambda) r = 0 and l (M - lambda) = 0, first row / column.
  const double r[2] = {b, lambda - a};
  const double l[2] = {c, lambda - a};
  StationaryChain out;
  double z = l[0] * r[0] + l[1] * r[1];
  out.pi = {l[0] * r[0] / z, l[1] * r[1] / z};
  out.p.assign(2, std::vector<double>(2));
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) out.p[u][v] = weights[u][v] * r[v] / (lambda * r[u]);
  out.second_eigenvalue = std::abs(half_trace - disc) / lambda;
  return out;
}

Word fibonacci_word(std::size_t length, Symbol a, Symbol b) {
  std::vector<bool> prev{false}, cur{false, true};  // "a", "ab"; true marks b
  while (cur.size() < length) {
    std::vector<bool> next = cur;
    next.insert(next.end(), prev.begin(), prev.end());
    prev = std::move(cur);
    cur = std::move(next);
  }
  Word out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) out.push_back(cur[i] ? b : a);
  return out;
}

Word designated_word(std::size_t alphabet_size, std::size_t length) {
  if (alphabet_size < 2 || length == 0) throw DomainError("designated_word: need b >= 2 and length >= 1");
  Word out{static_cast<Symbol>(alphabet_size - 1)};
  if (alphabet_size == 2) {
    out.resize(length, 0);
    return out;
  }
  Word tail = fibonacci_word(length - 1);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

Word swap_word(std::span<const Symbol> word, std::size_t alphabet_size) {
  Word out;
  out.reserve(word.size());
  for (Symbol s : word) out.push_back(static_cast<Symbol>(alphabet_size - 1 - s));
  return out;
}

namespace {

constexpr std::size_t kDesignatedLength = 64;

IntervalPartition example5_partition() { return IntervalPartition({0.0, 0.25, 0.5, 0.75}); }

RandomSFT example5_sft(double r) {
  const BoolMatrix ones(3, true);
  // chi_I = 1, chi_J = 0 on [1/4, 1/2); chi_I = 0, chi_J = 1 on [3/4, 1).
  const BoolMatrix quarter = BoolMatrix::from_rows({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}});
  const BoolMatrix last = BoolMatrix::from_rows({{1, 0, 0}, {0, 1, 1}, {0, 1, 1}});
  return RandomSFT(BaseRotation(r, "rotation"), example5_partition(), {ones, quarter, ones, last});
}

Potential tilted_potential() {
  std::vector<std::vector<double>> cells;
  for (double s : {1.0, -1.0}) {
    std::vector<double> table(9);
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v) {
        double value = (u == 1 ? kTiltAlpha : 0.0) + kTiltBeta * s * ((u == 0) - (u == 2)) + (u == v ? kTiltGamma : 0.0);
        table[u * 3 + v] = value;
      }
    cells.push_back(std::move(table));
  }
  return Potential(3, 2, IntervalPartition({0.0, 0.5}), std::move(cells));
}

RandomSFT full_shift(std::size_t b) {
  return RandomSFT(BaseRotation(kDefaultAngle, "rotation"), IntervalPartition(), {BoolMatrix(b, true)});
}

}  // namespace

Scenario build_example5(double r, const std::string& psi) {
  if (psi != "zero" && psi != "tilted") throw DomainError("example5 potential must be 'zero' or 'tilted', got '" + psi + "'");
  Scenario s{psi == "zero" ? "example5" : "example5-tilted",
             example5_sft(r),
             psi == "zero" ? Potential::zero(3) : tilted_potential(),
             designated_word(3, kDesignatedLength),
             true,
             "3 symbols, I = [0,3/4), J = [0,1/4) u [1/2,1); y = marker 3 then the Fibonacci word over {1,2}",
             std::nullopt,
             0.0};
  return s;
}

Scenario build_bernoulli_oracle(std::size_t b) {
  if (b < 2) throw DomainError("bernoulli oracle needs b >= 2");
  StationaryChain oracle;
  oracle.pi.assign(b, 1.0 / static_cast<double>(b));
  oracle.p.assign(b, std::vector<double>(b, 1.0 / static_cast<double>(b)));
  return Scenario{"bernoulli",
                  full_shift(b),
                  Potential::zero(b),
                  designated_word(b, kDesignatedLength),
                  true,
                  "full shift with psi = 0; mu_omega(C_n(w)) = b^-n",
                  std::move(oracle),
                  1e-12};
}

Scenario build_markov_oracle(const std::vector<std::vector<double>>& weights) {
  StationaryChain oracle = markov_closed_form(weights);
  std::vector<std::vector<double>> logs(2, std::vector<double>(2));
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) logs[u][v] = std::log(weights[u][v]);
  return Scenario{"markov",
                  full_shift(2),
                  Potential::constant_pair(logs),
                  designated_word(2, kDesignatedLength),
                  true,
                  "full 2-shift with psi(u,v) = ln w_uv; stationary Markov chain from the Perron vectors",
                  std::move(oracle),
                  1e-8};
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "example5") return build_example5();
  if (name == "example5-tilted") return build_example5(kDefaultAngle, "tilted");
  if (name == "bernoulli") return build_bernoulli_oracle(3);
  if (name == "markov") return build_markov_oracle({{2.0, 1.0}, {1.0, 3.0}});
  throw DomainError("unknown built-in scenario '" + name + "'");
}

std::optional<Interval> positive_measure_cell(const RandomSFT& sft, std::span<const Symbol> word) {
  IntervalPartition cells = refine(sft.partition(), sft.base(), std::max<std::size_t>(word.size(), 1));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double lo = cells.cell_begin(c), hi = cells.cell_end(c);
    if (!(hi - lo > kBreakpointTolerance)) continue;
    if (is_admissible(sft, 0.5 * (lo + hi), word)) return Interval{lo, hi};
  }
  return std::nullopt;
}

bool respects_symmetry(const Scenario& scenario) {
  const RandomSFT& sft = scenario.sft;
  const Potential& psi = scenario.potential;
  const std::size_t b = sft.alphabet_size();
  std::vector<double> points;
  for (const auto* part : {&sft.partition(), &psi.partition()})
    for (double x : part->breakpoints()) {
      points.push_back(x);
      points.push_back(frac(x + 0.5));
    }
  std::sort(points.begin(), points.end());
  points.push_back(1.0);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] - points[i] > kBreakpointTolerance)) continue;
    double omega = 0.5 * (points[i] + points[i + 1]);
    double shifted = frac(omega + 0.5);
    for (std::size_t u = 0; u < b; ++u)
      for (std::size_t v = 0; v < b; ++v) {
        auto su = static_cast<Symbol>(u), sv = static_cast<Symbol>(v);
        auto tu = static_cast<Symbol>(b - 1 - u), tv = static_cast<Symbol>(b - 1 - v);
        if (sft.allowed(omega, 0, su, sv) != sft.allowed(shifted, 0, tu, tv)) return false;
        if (psi.value(omega, su, sv) != psi.value(shifted, tu, tv)) return false;
      }
  }
  return true;
}

ReportEntry symmetry_check(const Scenario& scenario, std::size_t n, std::span<const QuadratureNode> grid,
                           double tol, const EngineOptions& options) {
  ReportEntry e;
  e.name = "symmetry_identity";
  e.target = 0.0;
  e.target_kind = TargetKind::kExact;
  e.tolerance = tol;
  if (!respects_symmetry(scenario)) {
    e.applicable = false;
    e.note = "the potential or the transition matrices do not respect omega -> omega + 1/2 with 1 <-> 3";
    return e;
  }
  const RandomSFT& sft = scenario.sft;
  double worst = 0.0;
  std::size_t compared = 0;
  for (const QuadratureNode& node : grid) {
    double shifted = frac(node.omega + 0.5);
    FiberChain here = converged_chain(sft, scenario.potential, node.omega, n, options);
    FiberChain there = converged_chain(sft, scenario.potential, shifted, n, options);
    for (std::size_t m = 1; m <= n; ++m) {
      CylinderSet words = admissible_words(sft, node.omega, m, options.word_cap);
      for (const Word& w : words.words()) {
        Word image = swap_word(w, sft.alphabet_size());
        worst = std::max(worst, std::abs(here.cylinder(0, w) - there.cylinder(0, image)));
        ++compared;
      }
    }
  }
  e.values = {worst, static_cast<double>(compared)};
  e.passed = worst < tol;
  std::ostringstream note;
  note << "max |mu_omega(C_m(w)) - mu_{omega+1/2}(C_m(w'))| over " << grid.size() << " nodes, m <= " << n
       << "; values = {deviation, comparisons}";
  e.note = note.str();
  return e;
}

namespace {

IntervalPartition merge(const IntervalPartition& a, const IntervalPartition& b) {
  std::vector<double> points(a.breakpoints().begin(), a.breakpoints().end());
  points.insert(points.end(), b.breakpoints().begin(), b.breakpoints().end());
  std::sort(points.begin(), points.end());
  std::vector<double> unique;
  for (double x : points)
    if (unique.empty() || x - unique.back() > kBreakpointTolerance) unique.push_back(x);
  return IntervalPartition(std::move(unique));
}

struct GridIntegrals {
  double mu = 0.0;
  double j = 0.0;
};

}  // namespace

NonmixingResult nonmixing_gap(const Scenario& scenario, const NonmixingOptions& options) {
  const RandomSFT& sft = scenario.sft;
  const Potential& psi = scenario.potential;
  if (options.word.empty()) throw DomainError("nonmixing_gap: empty word");
  IntervalPartition cells =
      refine(merge(sft.partition(), psi.partition()), sft.base(), std::max<std::size_t>(options.refine_depth, 1));
  auto f = [&](double omega, std::span<const Symbol> w) {
    return cylinder_measure(sft, psi, omega, w, options.engine).probability;
  };
  auto integrate = [&](const std::vector<QuadratureNode>& grid, std::vector<double>& values) {
    GridIntegrals out;
    values.clear();
    for (const QuadratureNode& node : grid) {
      double v = f(node.omega, options.word);
      values.push_back(v);
      out.mu += node.weight * v;
      out.j += node.weight * v * v;
    }
    return out;
  };
  std::vector<QuadratureNode> coarse = quadrature_grid(cells, options.points_per_cell);
  std::vector<QuadratureNode> fine = quadrature_grid(cells, 2 * options.points_per_cell);
  std::vector<double> coarse_values, fine_values;
  GridIntegrals c = integrate(coarse, coarse_values);
  GridIntegrals d = integrate(fine, fine_values);

  NonmixingResult out;
  out.mu = d.mu;
  out.j = d.j;
  out.gap = d.j - d.mu * d.mu;
  out.quadrature_error = std::abs(d.j - c.j) + std::abs(d.mu * d.mu - c.mu * c.mu);
  for (std::size_t i = 0; i < fine.size(); ++i)
    if (fine_values[i] > 0.0) out.support_measure += fine[i].weight;
  if (out.gap > 0.0 && out.quadrature_error * 10.0 > out.gap)
    out.warnings.push_back("quadrature under-resolves the support of omega -> mu_omega(C(x))");

  Word image = swap_word(options.word, sft.alphabet_size());
  out.k = half_turn_sequence(sft.base(), options.approach_terms);
  for (std::int64_t k : out.k) {
    double corr = 0.0, direct = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      if (fine_values[i] == 0.0) continue;
      double omega = fine[i].omega;
      corr += fine[i].weight * fine_values[i] * f(sft.base().point(frac(omega + 0.5), k), options.word);
      direct += fine[i].weight * fine_values[i] * f(sft.base().point(omega, k), image);
    }
    out.correlation.push_back(corr);
    out.direct_correlation.push_back(direct);
  }
  return out;
}

ReportEntry nonmixing_entry(const NonmixingResult& result) {
  ReportEntry e;
  e.name = "nonmixing_jensen_gap";
  e.target = 0.0;
  e.target_kind = TargetKind::kBound;
  e.tolerance = 10.0 * result.quadrature_error;
  double mu2 = result.mu * result.mu;
  bool margin = result.gap > 0.0 && result.gap >= 10.0 * result.quadrature_error;
  bool approach = !result.correlation.empty();
  double last = approach ? result.correlation.back() : 0.0;
  if (approach) {
    double first = result.correlation.front();
    approach = std::abs(last - result.j) < std::abs(last - mu2) &&
               std::abs(last - result.j) <= std::abs(first - result.j);
  }
  e.values = {result.gap, result.quadrature_error, result.j, mu2, last};
  e.passed = margin && approach;
  e.note = "J - mu(C)^2 >= 10 x quadrature error and correlations along k_i approach J; "
           "values = {gap, quadrature error, J, mu^2, last correlation}";
  return e;
}

}  // namespace rsft
