#include "rsft/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rsft {

Potential::Potential(std::size_t alphabet_size, std::size_t depth, IntervalPartition partition,
                     std::vector<std::vector<double>> cell_values, double holder_a, double holder_r)
    : alphabet_size_(alphabet_size),
      depth_(depth),
      partition_(std::move(partition)),
      cell_values_(std::move(cell_values)),
      holder_a_(holder_a),
      holder_r_(holder_r) {
  if (depth_ != 1 && depth_ != 2) throw DomainError("potential depth must be 1 or 2");
  if (cell_values_.size() != partition_.size())
    throw DomainError("potential needs one value table per partition cell");
  std::size_t entries = depth_ == 1 ? alphabet_size_ : alphabet_size_ * alphabet_size_;
  for (const auto& table : cell_values_) {
    if (table.size() != entries) throw DomainError("potential value table has the wrong size");
    for (double v : table)
      if (!std::isfinite(v)) throw DomainError("potential values must be finite");
  }
  if (holder_a_ < 0.0) throw DomainError("potential Hoelder constant a must be >= 0");
  if (!(holder_r_ > 0.0 && holder_r_ < 1.0)) throw DomainError("potential Hoelder rate r must lie in (0, 1)");
}

Potential Potential::zero(std::size_t alphabet_size) {
  return Potential(alphabet_size, 1, IntervalPartition(), {std::vector<double>(alphabet_size, 0.0)});
}

Potential Potential::constant_pair(const std::vector<std::vector<double>>& values) {
  std::vector<double> flat;
  for (const auto& row : values) {
    if (row.size() != values.size()) throw DomainError("pair potential table must be square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return Potential(values.size(), 2, IntervalPartition(), {flat});
}

double Potential::value(double omega, Symbol u, Symbol v) const {
  const auto& table = cell_values_[partition_.cell_of(omega)];
  return depth_ == 1 ? table[u] : table[u * alphabet_size_ + v];
}

namespace {

void require_compatible(const RandomSFT& sft, const Potential& psi) {
  if (sft.alphabet_size() != psi.alphabet_size())
    throw DomainError("potential and random SFT disagree on the alphabet size");
}

}  // namespace

double birkhoff_weight(const RandomSFT& sft, const Potential& psi, double omega, std::span<const Symbol> word) {
  require_compatible(sft, psi);
  // A depth-2 potential reads one symbol past each summation index.
  std::size_t lookahead = psi.depth() - 1;
  if (word.size() < psi.depth()) throw DomainError("birkhoff_weight: word shorter than potential depth");
  std::size_t terms = word.size() - lookahead;
  double log_weight = 0.0;
  for (std::size_t i = 0; i < terms; ++i) {
    double w = sft.base().point(omega, static_cast<std::int64_t>(i));
    Symbol next = lookahead ? word[i + 1] : word[i];
    log_weight += psi.value(w, word[i], next);
  }
  return std::exp(log_weight);
}

FiberChain::FiberChain(const RandomSFT& sft, const Potential& psi, double omega, std::size_t length,
                       std::size_t burn_in)
    : omega_(omega), length_(length), b_(sft.alphabet_size()), burn_in_(burn_in) {
  require_compatible(sft, psi);
  if (length_ == 0) throw DomainError("fiber chain length must be >= 1");
  const auto b = b_;
  const auto start = -static_cast<std::int64_t>(burn_in);
  const auto stop = static_cast<std::int64_t>(length + burn_in);  // symbol positions [start, stop)
  const std::size_t steps = static_cast<std::size_t>(stop - start - 1);

  // Transfer weights W_t(u, v) = a_uv(theta^t omega) exp(psi(theta^t omega, u v)), with the
  // log-potential shifted so that the largest weight in every step is 1.
  std::vector<double> weights(steps * b * b);
  for (std::size_t s = 0; s < steps; ++s) {
    double w = sft.base().point(omega, start + static_cast<std::int64_t>(s));
    const BoolMatrix& q = sft.matrix_at(w);
    double* out = weights.data() + s * b * b;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < b; ++u)
      for (std::size_t v = 0; v < b; ++v)
        if (q(u, v)) top = std::max(top, psi.value(w, static_cast<Symbol>(u), static_cast<Symbol>(v)));
    for (std::size_t u = 0; u < b; ++u)
      for (std::size_t v = 0; v < b; ++v)
        out[u * b + v] =
            q(u, v) ? std::exp(psi.value(w, static_cast<Symbol>(u), static_cast<Symbol>(v)) - top) : 0.0;
  }
  auto step_index = [&](std::int64_t t) { return static_cast<std::size_t>(t - start); };

  // Right vectors r_t = W_t r_{t+1} (sup-normalised) for t = length-1 down to 0, started
  // flat at the last position of the window.
  std::vector<double> right(length * b);
  std::vector<double> r(b, 1.0), tmp(b);
  for (std::int64_t t = stop - 2; t >= 0; --t) {
    const double* w = weights.data() + step_index(t) * b * b;
    double norm = 0.0;
    for (std::size_t u = 0; u < b; ++u) {
      double acc = 0.0;
      for (std::size_t v = 0; v < b; ++v) acc += w[u * b + v] * r[v];
      tmp[u] = acc;
      norm = std::max(norm, acc);
    }
    for (std::size_t u = 0; u < b; ++u) r[u] = tmp[u] / norm;
    if (t < static_cast<std::int64_t>(length)) std::copy(r.begin(), r.end(), right.begin() + t * b);
  }
  if (burn_in == 0) std::fill(right.end() - static_cast<std::ptrdiff_t>(b), right.end(), 1.0);

  // Left vectors l_{t+1} = l_t W_t started flat at the first position of the window.
  std::vector<double> l(b, 1.0);
  marginals_.assign(length * b, 0.0);
  for (std::int64_t t = start;; ++t) {
    if (t >= 0) {
      double* pi = marginals_.data() + t * b;
      const double* rt = right.data() + t * b;
      double total = 0.0;
      for (std::size_t u = 0; u < b; ++u) total += pi[u] = l[u] * rt[u];
      for (std::size_t u = 0; u < b; ++u) pi[u] /= total;
    }
    if (t + 1 >= static_cast<std::int64_t>(length)) break;
    const double* w = weights.data() + step_index(t) * b * b;
    double norm = 0.0;
    for (std::size_t v = 0; v < b; ++v) {
      double acc = 0.0;
      for (std::size_t u = 0; u < b; ++u) acc += l[u] * w[u * b + v];
      tmp[v] = acc;
      norm = std::max(norm, acc);
    }
    for (std::size_t v = 0; v < b; ++v) l[v] = tmp[v] / norm;
  }

  // P_t(u, v) = W_t(u, v) r_{t+1}(v) / (W_t r_{t+1})(u).
  transitions_.assign(length > 1 ? (length - 1) * b * b : 0, 0.0);
  for (std::size_t t = 0; t + 1 < length; ++t) {
    const double* w = weights.data() + step_index(static_cast<std::int64_t>(t)) * b * b;
    const double* rn = right.data() + (t + 1) * b;
    for (std::size_t u = 0; u < b; ++u) {
      double* row = transitions_.data() + (t * b + u) * b;
      double total = 0.0;
      for (std::size_t v = 0; v < b; ++v) total += row[v] = w[u * b + v] * rn[v];
      for (std::size_t v = 0; v < b; ++v) row[v] /= total;
    }
  }
}

double FiberChain::cylinder(std::size_t t, std::span<const Symbol> word) const {
  if (word.empty() || t + word.size() > length_) throw DomainError("cylinder outside the fiber chain window");
  double p = marginal(t, word[0]);
  for (std::size_t j = 0; j + 1 < word.size() && p != 0.0; ++j) p *= transition(t + j, word[j], word[j + 1]);
  return p;
}

double FiberChain::cylinder_set(std::size_t t, const CylinderSet& set) const {
  double total = 0.0;
  for (const Word& w : set.words()) total += cylinder(t, w);
  return total;
}

double FiberChain::distance(const FiberChain& other) const {
  if (other.length_ != length_ || other.b_ != b_) throw DomainError("fiber chains have different shapes");
  double gap = 0.0;
  for (std::size_t i = 0; i < marginals_.size(); ++i) gap = std::max(gap, std::abs(marginals_[i] - other.marginals_[i]));
  for (std::size_t i = 0; i < transitions_.size(); ++i)
    gap = std::max(gap, std::abs(transitions_[i] - other.transitions_[i]));
  return gap;
}

FiberChain converged_chain(const RandomSFT& sft, const Potential& psi, double omega, std::size_t length,
                           const EngineOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("engine tolerance must be positive");
  std::size_t m = std::max<std::size_t>(options.initial_burn_in, 1);
  FiberChain previous(sft, psi, omega, length, m);
  double gap = std::numeric_limits<double>::infinity();
  while (2 * m <= options.max_burn_in) {
    m *= 2;
    FiberChain current(sft, psi, omega, length, m);
    gap = current.distance(previous);
    if (gap < options.tol) return current;
    previous = std::move(current);
  }
  std::ostringstream msg;
  msg << "finite-volume measure did not converge by burn-in " << m << " (Cauchy gap " << gap << ", tolerance "
      << options.tol << ")";
  throw ConvergenceError(msg.str(), gap);
}

CylinderMeasure cylinder_measure(const RandomSFT& sft, const Potential& psi, double omega,
                                 std::span<const Symbol> word, const EngineOptions& options) {
  if (word.empty()) throw DomainError("cylinder_measure: empty word");
  if (word.size() > options.max_word_length)
    throw DomainError("cylinder_measure: word longer than the configured maximum");
  for (Symbol s : word)
    if (s >= sft.alphabet_size()) throw DomainError("cylinder_measure: symbol outside the alphabet");
  if (!is_admissible(sft, omega, word)) return {0.0, 0};
  FiberChain chain = converged_chain(sft, psi, omega, word.size(), options);
  return {chain.cylinder(0, word), chain.burn_in()};
}

double CylinderMeasureTable::total() const {
  double s = 0.0;
  for (const auto& [w, p] : probs) s += p;
  return s;
}

CylinderMeasureTable measure_table(const FiberChain& chain, const RandomSFT& sft, std::size_t t, std::size_t n,
                                   std::size_t cap) {
  double omega = sft.base().point(chain.omega(), static_cast<std::int64_t>(t));
  CylinderMeasureTable table{omega, n, chain.burn_in(), 0.0, {}};
  CylinderSet words = admissible_words(sft, omega, n, cap);
  for (const Word& w : words.words()) table.probs.emplace(w, chain.cylinder(t, w));
  return table;
}

CylinderMeasureTable measure_table(const RandomSFT& sft, const Potential& psi, double omega, std::size_t n,
                                   const EngineOptions& options) {
  if (n == 0 || n > options.max_word_length) throw DomainError("measure_table: depth outside 1..max_word_length");
  FiberChain chain = converged_chain(sft, psi, omega, n, options);
  CylinderMeasureTable table = measure_table(chain, sft, 0, n, options.word_cap);
  table.omega = omega;
  table.tol = options.tol;
  return table;
}

PathSampler::PathSampler(const FiberChain& chain)
    : length_(chain.length()), b_(chain.alphabet_size()), first_cdf_(b_), cdf_() {
  std::partial_sum(chain.marginal_row(0).begin(), chain.marginal_row(0).end(), first_cdf_.begin());
  cdf_.resize(length_ > 1 ? (length_ - 1) * b_ * b_ : 0);
  for (std::size_t t = 0; t + 1 < length_; ++t)
    for (std::size_t u = 0; u < b_; ++u) {
      auto row = chain.transition_row(t, static_cast<Symbol>(u));
      std::partial_sum(row.begin(), row.end(), cdf_.begin() + static_cast<std::ptrdiff_t>((t * b_ + u) * b_));
    }
}

namespace {

Symbol pick(const double* cdf, std::size_t b, double u) {
  // Forbidden symbols have zero width and can never be selected; scale by the total to
  // absorb the rounding of the cumulative sum.
  double x = u * cdf[b - 1];
  std::size_t s = 0;
  while (s + 1 < b && !(x < cdf[s])) ++s;
  while (s > 0 && cdf[s] == cdf[s - 1]) --s;
  return static_cast<Symbol>(s);
}

}  // namespace

Symbol PathSampler::first(double u) const { return pick(first_cdf_.data(), b_, u); }

Symbol PathSampler::next(std::size_t t, Symbol current, double u) const {
  return pick(cdf_.data() + (t * b_ + current) * b_, b_, u);
}

Word sample_path(const RandomSFT& sft, const Potential& psi, double omega, std::size_t length,
                 std::mt19937_64& rng, const EngineOptions& options) {
  if (length == 0) throw DomainError("sample_path: length must be >= 1");
  PathSampler sampler(converged_chain(sft, psi, omega, length, options));
  return sampler.sample(rng, length);
}

double marginal_cylinder_measure(const RandomSFT& sft, const Potential& psi, std::span<const Symbol> word,
                                 std::span<const QuadratureNode> grid, const EngineOptions& options) {
  double total = 0.0;
  for (const QuadratureNode& node : grid)
    total += node.weight * cylinder_measure(sft, psi, node.omega, word, options).probability;
  return total;
}

Estimate marginal_cylinder_measure(const RandomSFT& sft, const Potential& psi, std::span<const Symbol> word,
                                   const IntervalPartition& partition, std::size_t points_per_cell,
                                   const EngineOptions& options) {
  double coarse = marginal_cylinder_measure(sft, psi, word, quadrature_grid(partition, points_per_cell), options);
  double fine = marginal_cylinder_measure(sft, psi, word, quadrature_grid(partition, 2 * points_per_cell), options);
  return {fine, std::abs(fine - coarse)};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line needs at least two paired points");
  double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.points = x.size();
  return fit;
}

double max_cylinder_measure(const FiberChain& chain, std::size_t t, std::size_t n) {
  if (n == 0 || t + n > chain.length()) throw DomainError("max_cylinder_measure: window outside the chain");
  std::size_t b = chain.alphabet_size();
  auto pi = chain.marginal_row(t);
  std::vector<double> best(pi.begin(), pi.end()), next(b);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t u = 0; u < b; ++u)
      for (std::size_t v = 0; v < b; ++v)
        next[v] = std::max(next[v], best[u] * chain.transition(t + j, static_cast<Symbol>(u), static_cast<Symbol>(v)));
    best.swap(next);
  }
  return *std::max_element(best.begin(), best.end());
}

DecaySeries epsilon_decay(const RandomSFT& sft, const Potential& psi, std::size_t n_min, std::size_t n_max,
                          std::span<const QuadratureNode> grid, const EngineOptions& options) {
  if (n_min == 0 || n_max < n_min) throw DomainError("epsilon_decay: invalid n range");
  if (grid.empty()) throw DomainError("epsilon_decay: empty grid");
  DecaySeries series;
  for (std::size_t n = n_min; n <= n_max; ++n) series.n.push_back(n);
  series.epsilon.assign(series.n.size(), 0.0);
  for (const QuadratureNode& node : grid) {
    FiberChain chain = converged_chain(sft, psi, node.omega, n_max, options);
    for (std::size_t i = 0; i < series.n.size(); ++i)
      series.epsilon[i] = std::max(series.epsilon[i], max_cylinder_measure(chain, 0, series.n[i]));
  }
  if (series.n.size() >= 2) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < series.n.size(); ++i) {
      x.push_back(static_cast<double>(series.n[i]));
      y.push_back(std::log(series.epsilon[i]));
    }
    series.fit = fit_line(x, y);
  }
  return series;
}

double distortion_constant(const RandomSFT& sft, const Potential& psi, double omega, std::size_t n, std::size_t m,
                           std::size_t max_words, std::uint64_t seed, const EngineOptions& options) {
  if (n == 0 || m == 0) throw DomainError("distortion_constant: n and m must be >= 1");
  std::size_t length = n + m;
  FiberChain chain = converged_chain(sft, psi, omega, length, options);
  auto ratio_of = [&](std::span<const Symbol> w) {
    double joint = chain.cylinder(0, w);
    double head = chain.cylinder(0, w.first(n));
    double tail = chain.cylinder(n, w.subspan(n));
    double ratio = joint / (head * tail);
    return std::max(ratio, 1.0 / ratio);
  };
  double c = 1.0;
  if (count_admissible(sft, omega, length) <= max_words) {
    CylinderSet words = admissible_words(sft, omega, length, max_words);
    for (const Word& w : words.words()) c = std::max(c, ratio_of(w));
  } else {
    PathSampler sampler(chain);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < max_words; ++i) c = std::max(c, ratio_of(sampler.sample(rng, length)));
  }
  return c;
}

}  // namespace rsft
