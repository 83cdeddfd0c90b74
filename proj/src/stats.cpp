#include "rsft/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

namespace rsft {

const char* to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::kBound:
      return "bound";
    case TargetKind::kLimit:
      return "limit";
    case TargetKind::kOracle:
      return "oracle";
    case TargetKind::kExact:
      return "exact";
  }
  return "exact";
}

bool VerificationReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return !e.applicable || e.passed; });
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::vector<std::vector<std::uint32_t>> simulate_hits(const FiberChain& chain, const CylinderSet& a,
                                                      std::size_t horizon, const MCConfig& mc, bool first_only) {
  const std::size_t n = a.depth();
  const std::size_t length = horizon + n;
  if (length > chain.length()) throw DomainError("simulate_hits: fiber chain shorter than horizon + depth(A)");
  if (mc.samples == 0) throw DomainError("simulate_hits: sample count must be >= 1");
  const PathSampler sampler(chain);
  std::vector<std::vector<std::uint32_t>> hits(mc.samples);
  parallel_for(mc.samples, mc.workers, [&](std::size_t i) {
    auto rng = make_stream(mc.seed, i);
    Word x;
    x.reserve(length);
    x.push_back(sampler.first(PathSampler::uniform(rng)));
    for (std::size_t s = 1; s < length; ++s) {
      x.push_back(sampler.next(s - 1, x.back(), PathSampler::uniform(rng)));
      if (s < n) continue;
      std::size_t k = s - n + 1;
      if (a.contains(std::span<const Symbol>(x).subspan(k, n))) {
        hits[i].push_back(static_cast<std::uint32_t>(k));
        if (first_only) break;
      }
    }
  });
  return hits;
}

PointProcessRealization realization_from_hits(const TimeChange& tc, std::span<const std::uint32_t> hits) {
  PointProcessRealization re;
  re.times.reserve(hits.size());
  for (auto k : hits) {
    if (k == 0 || k > tc.horizon()) throw DomainError("hit index outside the time change horizon");
    re.times.push_back(tc.partial[k]);
  }
  return re;
}

namespace {

std::size_t checked_power(std::size_t base, std::size_t exponent, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (out > cap / base) throw CapExceeded("window event state space exceeds cap");
    out *= base;
  }
  return out;
}

constexpr std::size_t kStateCap = std::size_t{1} << 24;

/// Forward pass over windows of depth n starting at offsets 0 .. last_offset from position t.
/// constraint(j) returns -1 (free), 0 (outside A) or 1 (inside A) for the window at offset j;
/// after each window is resolved, on_window(j, mass) receives the surviving mass.
class WindowPass {
 public:
  WindowPass(const FiberChain& chain, std::size_t t, const CylinderSet& a) : chain_(chain), t_(t) {
    b_ = chain.alphabet_size();
    n_ = a.depth();
    if (n_ == 0) throw DomainError("window events need a nonempty cylinder depth");
    words_ = checked_power(b_, n_, kStateCap);
    states_ = checked_power(b_, std::max<std::size_t>(n_ - 1, 1), kStateCap);
    member_.assign(words_, 0);
    for (const Word& w : a.words()) {
      std::size_t code = 0;
      for (Symbol s : w) code = code * b_ + s;
      member_[code] = 1;
    }
  }

  double run(std::size_t last_offset, const std::function<int(std::size_t)>& constraint,
             const std::function<void(std::size_t, double)>& on_window = {}) const {
    std::size_t symbols = last_offset + n_;
    if (t_ + symbols > chain_.length()) throw DomainError("window event extends past the fiber chain");
    std::vector<double> dist(states_, 0.0), next(states_, 0.0);
    for (std::size_t v = 0; v < b_; ++v) dist[v] = chain_.marginal(t_, static_cast<Symbol>(v));
    if (n_ == 1) apply_first(dist, constraint, on_window);
    for (std::size_t s = 1; s < symbols; ++s) {
      std::fill(next.begin(), next.end(), 0.0);
      bool complete = s + 1 >= n_;
      std::size_t j = complete ? s + 1 - n_ : 0;
      int rule = complete ? constraint(j) : -1;
      for (std::size_t state = 0; state < states_; ++state) {
        double mass = dist[state];
        if (mass == 0.0) continue;
        auto u = static_cast<Symbol>(state % b_);
        auto row = chain_.transition_row(t_ + s - 1, u);
        for (std::size_t v = 0; v < b_; ++v) {
          if (row[v] == 0.0) continue;
          std::size_t full = state * b_ + v;
          if (rule >= 0 && member_[full % words_] != rule) continue;
          next[full % states_] += mass * row[v];
        }
      }
      dist.swap(next);
      if (complete && on_window) on_window(j, std::accumulate(dist.begin(), dist.end(), 0.0));
    }
    return std::accumulate(dist.begin(), dist.end(), 0.0);
  }

 private:
  void apply_first(std::vector<double>& dist, const std::function<int(std::size_t)>& constraint,
                   const std::function<void(std::size_t, double)>& on_window) const {
    int rule = constraint(0);
    if (rule >= 0)
      for (std::size_t v = 0; v < b_; ++v)
        if (member_[v] != rule) dist[v] = 0.0;
    if (on_window) on_window(0, std::accumulate(dist.begin(), dist.end(), 0.0));
  }

  const FiberChain& chain_;
  std::size_t t_;
  std::size_t b_ = 0, n_ = 0, words_ = 0, states_ = 0;
  std::vector<std::uint8_t> member_;
};

}  // namespace

double window_event_probability(const FiberChain& chain, std::size_t t, const CylinderSet& a,
                                std::span<const WindowConstraint> constraints) {
  std::size_t last = 0;
  for (const auto& c : constraints) last = std::max(last, c.offset);
  std::vector<int> rule(last + 1, -1);
  for (const auto& c : constraints) {
    int want = c.in_set ? 1 : 0;
    if (rule[c.offset] >= 0 && rule[c.offset] != want) return 0.0;
    rule[c.offset] = want;
  }
  return WindowPass(chain, t, a).run(last, [&](std::size_t j) { return j < rule.size() ? rule[j] : -1; });
}

AvoidanceMeasures avoidance_measures(const FiberChain& chain, std::size_t t, const CylinderSet& a,
                                     std::span<const std::size_t> offsets) {
  std::vector<WindowConstraint> constraints;
  for (std::size_t j : offsets) constraints.push_back({j, false});
  AvoidanceMeasures out;
  out.avoid = offsets.empty() ? 1.0 : window_event_probability(chain, t, a, constraints);
  constraints.push_back({0, true});
  out.in_a_and_avoid = window_event_probability(chain, t, a, constraints);
  return out;
}

double brute_delta(const FiberChain& chain, std::size_t t, const CylinderSet& a, std::size_t k,
                   std::optional<std::size_t> gap) {
  if (k > kMaxDeltaHorizon) throw CapExceeded("brute_delta: k exceeds the subset enumeration cap of 12");
  std::size_t lo = gap ? *gap + 1 : 1;
  if (lo > k) return 0.0;
  double mass = chain.cylinder_set(t, a);
  std::size_t span = k - lo + 1;
  double best = 0.0;
  std::vector<std::size_t> offsets;
  for (std::uint32_t mask = 1; mask < (1u << span); ++mask) {
    offsets.clear();
    for (std::size_t bit = 0; bit < span; ++bit)
      if (mask & (1u << bit)) offsets.push_back(lo + bit);
    AvoidanceMeasures m = avoidance_measures(chain, t, a, offsets);
    best = std::max(best, std::abs(m.in_a_and_avoid - mass * m.avoid));
  }
  return best;
}

double brute_delta(const RandomSFT& sft, const Potential& psi, double omega, const CylinderSet& a, std::size_t k,
                   const EngineOptions& options) {
  FiberChain chain = converged_chain(sft, psi, omega, k + a.depth(), options);
  return brute_delta(chain, 0, a, k);
}

GhkTerms ghk_terms(const FiberChain& chain, const CylinderSet& a, std::size_t k, std::size_t g, double phi,
                   bool exact_h) {
  if (chain.length() < k + g + a.depth()) throw DomainError("ghk_terms: fiber chain too short");
  std::vector<std::size_t> early(g);
  std::iota(early.begin(), early.end(), std::size_t{1});
  GhkTerms out;
  double tk = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    double mass = chain.cylinder_set(i, a);
    tk += mass;
    if (g == 0) continue;
    AvoidanceMeasures m = avoidance_measures(chain, i, a, early);
    out.g += mass - m.in_a_and_avoid;
    out.k += mass * (1.0 - m.avoid);
  }
  out.h_bound = phi * tk;
  if (exact_h) {
    double h = 0.0;
    for (std::size_t i = 1; i <= k; ++i) h += brute_delta(chain, i, a, k - i, g);
    out.h_exact = h;
  }
  return out;
}

double no_hit_probability(const FiberChain& chain, const CylinderSet& a, std::span<const std::size_t> offsets) {
  if (offsets.empty()) return 1.0;
  std::vector<WindowConstraint> constraints;
  for (std::size_t j : offsets) constraints.push_back({j, false});
  return window_event_probability(chain, 0, a, constraints);
}

std::vector<double> exact_survival(const FiberChain& chain, const CylinderSet& a, std::size_t k_max) {
  std::vector<double> survival(k_max + 1, 1.0);
  if (k_max == 0) return survival;
  WindowPass(chain, 0, a)
      .run(
          k_max, [](std::size_t j) { return j == 0 ? -1 : 0; },
          [&](std::size_t j, double mass) {
            if (j >= 1) survival[j] = mass;
          });
  return survival;
}

ReportEntry check_k1_exact(const TimeChange& tc, const WindowConstants& wc, const IntervalUnion& r) {
  double expected = 0.0;
  for (std::size_t i = 0; i < wc.p.size(); ++i) expected += tc.partial[wc.p[i] + wc.q[i]] - tc.partial[wc.p[i]];
  double bound = 2.0 * static_cast<double>(r.size()) * tc.max_step();
  double deviation = std::abs(expected - r.lebesgue());
  ReportEntry e;
  e.name = "k1_expected_count";
  e.values = {expected, deviation, bound};
  e.target = r.lebesgue();
  e.target_kind = TargetKind::kBound;
  e.tolerance = bound;
  e.passed = deviation <= bound;
  e.note = "|E N(R) - Leb(R)| <= 2 r eps(A); values = {expected, deviation, bound}";
  return e;
}

namespace {

// Rounding slack for inequalities whose two sides are both computed exactly.
constexpr double kExactSlack = 1e-13;

}  // namespace

ReportEntry check_k_bound(const GhkTerms& terms, std::size_t g, double epsilon, double sup_r) {
  double bound = static_cast<double>(g) * epsilon * sup_r;
  ReportEntry e;
  e.name = "k_term_bound";
  e.values = {terms.k, bound};
  e.target = bound;
  e.target_kind = TargetKind::kBound;
  // Equality is attained when hits cannot overlap and T^k* = sup R.
  e.tolerance = kExactSlack;
  e.passed = terms.k <= bound * (1.0 + kExactSlack) + kExactSlack;
  e.note = "K_{A,k*,g} <= g eps(A) sup R; values = {K, bound}";
  return e;
}

ReportEntry check_decomposition(const FiberChain& chain, const CylinderSet& a, std::size_t k, std::size_t g) {
  if (g > k) throw DomainError("check_decomposition: g must be <= k");
  double lhs = 0.0;
  for (std::size_t i = 1; i <= k; ++i) lhs += brute_delta(chain, i, a, k - i);
  GhkTerms terms = ghk_terms(chain, a, k, g, 0.0, /*exact_h=*/true);
  double rhs = terms.g + *terms.h_exact + terms.k;
  ReportEntry e;
  e.name = "ghk_decomposition";
  e.values = {lhs, rhs, terms.g, *terms.h_exact, terms.k};
  e.target = rhs;
  e.target_kind = TargetKind::kBound;
  e.tolerance = kExactSlack;
  e.passed = lhs <= rhs + kExactSlack;
  std::ostringstream note;
  note << "sum_i Delta(A, k-i) <= G + H + K at k=" << k << ", g=" << g << "; values = {lhs, rhs, G, H, K}";
  e.note = note.str();
  return e;
}

ReportEntry check_telescoping(const FiberChain& chain, const CylinderSet& a, const TimeChange& tc,
                              const IntervalUnion& r) {
  WindowConstants wc = window_constants(tc, r);
  std::vector<std::size_t> offsets;
  double product = 1.0, rhs = 0.0;
  for (std::size_t i = 0; i < wc.p.size(); ++i)
    for (std::size_t j = wc.p[i] + 1; j <= wc.p[i] + wc.q[i]; ++j) {
      offsets.push_back(j);
      product *= 1.0 - tc.masses[j];
      rhs += brute_delta(chain, j, a, wc.k_star - j);
    }
  double void_probability = no_hit_probability(chain, a, offsets);
  double lhs = std::abs(void_probability - product);
  ReportEntry e;
  e.name = "void_probability_telescoping";
  e.values = {lhs, rhs, void_probability, product};
  e.target = rhs;
  e.target_kind = TargetKind::kBound;
  e.tolerance = kExactSlack;
  e.passed = lhs <= rhs + kExactSlack;
  e.note = "|P(N(R)=0) - prod(1 - mu_j(A))| <= sum Delta(A, k*-j); values = {lhs, rhs, P(N(R)=0), product}";
  return e;
}

bool product_inequality_check(std::span<const double> xs, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("product inequality needs 0 < eps <= 1/2");
  double sum = 0.0, log_product = 0.0;
  for (double x : xs) {
    if (!(x >= 0.0 && x <= epsilon)) throw DomainError("product inequality needs every x in [0, eps]");
    sum += x;
    log_product += std::log1p(-x);
  }
  double slack = 4e-16 * (1.0 + sum);
  return -(1.0 + 2.0 * epsilon) * sum <= log_product + slack && log_product <= -(1.0 - 2.0 * epsilon) * sum + slack;
}

Proportion wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("wilson_interval: no trials");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double centre = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half), successes, trials};
}

namespace {

std::vector<std::size_t> window_offsets(const WindowConstants& wc) {
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < wc.p.size(); ++i)
    for (std::size_t j = wc.p[i] + 1; j <= wc.p[i] + wc.q[i]; ++j) offsets.push_back(j);
  return offsets;
}

}  // namespace

ZeroProbability mc_zero_probability(const HittingSetup& setup, const CylinderSet& a, const IntervalUnion& r,
                                    const MCConfig& mc) {
  WindowConstants wc = window_constants(setup.time_change, r);
  ZeroProbability out;
  out.limit = std::exp(-r.lebesgue());
  std::vector<std::size_t> offsets = window_offsets(wc);
  out.oracle = no_hit_probability(setup.chain, a, offsets);
  std::size_t zeros = 0;
  if (wc.k_star == 0) {
    zeros = mc.samples;
  } else {
    auto hits = simulate_hits(setup.chain, a, wc.k_star, mc);
    for (const auto& h : hits) {
      auto counts = counts_in(realization_from_hits(setup.time_change, h), r);
      if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == 0) ++zeros;
    }
  }
  out.mc = wilson_interval(zeros, mc.samples);
  return out;
}

namespace {

std::size_t horizon_for(const TimeChange& tc, double target) {
  auto it = std::lower_bound(tc.partial.begin(), tc.partial.end(), target);
  if (it == tc.partial.end()) {
    std::ostringstream msg;
    msg << "time change never reaches " << target << " (T^K = " << tc.partial.back() << ")";
    throw HorizonError(msg.str());
  }
  return static_cast<std::size_t>(std::distance(tc.partial.begin(), it));
}

}  // namespace

ExpLawResult exp_law_error(const HittingSetup& setup, const CylinderSet& a, const MCConfig& mc, double target) {
  const TimeChange& tc = setup.time_change;
  ExpLawResult out;
  out.k_max = horizon_for(tc, target);
  auto hits = simulate_hits(setup.chain, a, out.k_max, mc, /*first_only=*/true);
  // survivors[k] = #{tau > k}
  std::vector<std::size_t> first_at(out.k_max + 2, 0);
  for (const auto& h : hits) first_at[h.empty() ? out.k_max + 1 : h.front()]++;
  out.empirical_survival.resize(out.k_max + 1);
  std::size_t alive = mc.samples;
  for (std::size_t k = 0; k <= out.k_max; ++k) {
    alive -= first_at[k];
    out.empirical_survival[k] = static_cast<double>(alive) / static_cast<double>(mc.samples);
    double d = std::abs(out.empirical_survival[k] - std::exp(-tc.partial[k]));
    if (d > out.sup_distance) {
      out.sup_distance = d;
      out.argmax = k;
    }
  }
  return out;
}

double exp_law_error_exact(const HittingSetup& setup, const CylinderSet& a, double target) {
  const TimeChange& tc = setup.time_change;
  std::size_t k_max = horizon_for(tc, target);
  std::vector<double> survival = exact_survival(setup.chain, a, k_max);
  double sup = 0.0;
  for (std::size_t k = 0; k <= k_max; ++k) sup = std::max(sup, std::abs(survival[k] - std::exp(-tc.partial[k])));
  return sup;
}

PhiSeries estimate_phi(const FiberChain& chain, std::size_t n, std::size_t m, std::span<const std::size_t> gaps) {
  if (n == 0 || m == 0 || gaps.empty()) throw DomainError("estimate_phi: n, m >= 1 and gaps nonempty required");
  std::size_t g_max = *std::max_element(gaps.begin(), gaps.end());
  if (chain.length() < n + g_max + m) throw DomainError("estimate_phi: fiber chain too short");
  const std::size_t b = chain.alphabet_size();

  // phi(g) depends on A only through its last symbol u (Markov property):
  // mu(A cap sigma^{-g-n} B) / mu(A) - mu_{theta^{n+g}}(B)
  //   = (P(x_{n+g} = B_0 | x_{n-1} = u) - pi_{n+g}(B_0)) * prod of transitions along B.
  std::vector<double> phi_all(g_max + 1, 0.0);
  std::vector<std::vector<double>> cond(b, std::vector<double>(b, 0.0));
  for (std::size_t u = 0; u < b; ++u) cond[u][u] = 1.0;
  std::vector<double> tmp(b);
  for (std::size_t g = 0; g <= g_max; ++g) {
    for (std::size_t u = 0; u < b; ++u) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (std::size_t s = 0; s < b; ++s)
        for (std::size_t v = 0; v < b; ++v)
          tmp[v] += cond[u][s] * chain.transition(n - 1 + g, static_cast<Symbol>(s), static_cast<Symbol>(v));
      cond[u] = tmp;
    }
    std::size_t pos = n + g;
    // Largest product of transitions over admissible B with B_0 = v.
    std::vector<double> best(b, 1.0), next(b);
    for (std::size_t j = m - 1; j-- > 0;) {
      for (std::size_t v = 0; v < b; ++v) {
        next[v] = 0.0;
        for (std::size_t w = 0; w < b; ++w)
          next[v] = std::max(next[v], chain.transition(pos + j, static_cast<Symbol>(v), static_cast<Symbol>(w)) * best[w]);
      }
      best.swap(next);
    }
    double phi = 0.0;
    for (std::size_t u = 0; u < b; ++u) {
      if (chain.marginal(n - 1, static_cast<Symbol>(u)) <= 0.0) continue;
      for (std::size_t v = 0; v < b; ++v)
        phi = std::max(phi, std::abs(cond[u][v] - chain.marginal(pos, static_cast<Symbol>(v))) * best[v]);
    }
    phi_all[g] = phi;
  }
  PhiSeries out;
  std::vector<double> x, y;
  for (std::size_t g : gaps) {
    out.gaps.push_back(g);
    out.phi.push_back(phi_all[g]);
    if (phi_all[g] > 0.0) {
      x.push_back(static_cast<double>(g));
      y.push_back(std::log(phi_all[g]));
    }
  }
  if (x.size() >= 2) out.fit = fit_line(x, y);
  return out;
}

PhiSeries estimate_phi(const RandomSFT& sft, const Potential& psi, double omega, std::size_t n, std::size_t m,
                       std::span<const std::size_t> gaps, const EngineOptions& options) {
  if (gaps.empty()) throw DomainError("estimate_phi: gaps must be nonempty");
  std::size_t g_max = *std::max_element(gaps.begin(), gaps.end());
  FiberChain chain = converged_chain(sft, psi, omega, n + g_max + m, options);
  return estimate_phi(chain, n, m, gaps);
}

BetaSeries estimate_beta(const RandomSFT& sft, const Potential& psi, std::span<const QuadratureNode> grid,
                         std::span<const Symbol> y, std::size_t n_min, std::size_t n_max,
                         const EngineOptions& options) {
  if (n_min == 0 || n_max < n_min || y.size() < n_max) throw DomainError("estimate_beta: invalid depth range");
  BetaSeries out;
  for (std::size_t j = 1; j <= n_max; ++j) out.j.push_back(j);
  for (std::size_t n = n_min; n <= n_max; ++n) out.n.push_back(n);
  out.beta0.assign(out.j.size(), 0.0);
  out.beta1.assign(out.n.size(), 0.0);
  for (const QuadratureNode& node : grid) {
    FiberChain chain = converged_chain(sft, psi, node.omega, 3 * n_max, options);
    for (std::size_t n = n_min; n <= n_max; ++n) {
      Word prefix(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
      double base = chain.cylinder(0, prefix);
      if (base < kNegligibleMeasure) {
        ++out.skipped;
        continue;
      }
      CylinderSet cyl = CylinderSet::single(prefix);
      for (std::size_t j = 1; j <= 2 * n; ++j) {
        CylinderSet both = cylinder_intersection(sft, node.omega, cyl, j, cyl, options.word_cap);
        double ratio = chain.cylinder_set(0, both) / base;
        if (j <= n)
          out.beta0[j - 1] = std::max(out.beta0[j - 1], ratio);
        else
          out.beta1[n - n_min] = std::max(out.beta1[n - n_min], ratio);
      }
    }
  }
  auto fit_positive = [](const std::vector<std::size_t>& xs, const std::vector<double>& ys) -> std::optional<LinearFit> {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (ys[i] > 0.0) {
        x.push_back(static_cast<double>(xs[i]));
        y.push_back(std::log(ys[i]));
      }
    if (x.size() < 2) return std::nullopt;
    return fit_line(x, y);
  };
  out.fit0 = fit_positive(out.j, out.beta0);
  out.fit1 = fit_positive(out.n, out.beta1);
  return out;
}

PointProcessRealization sample_uniform_ppp(double horizon, std::mt19937_64& rng) {
  if (!(horizon > 0.0)) throw DomainError("sample_uniform_ppp: horizon must be positive");
  PointProcessRealization re;
  double t = 0.0;
  while (true) {
    double u = 1.0 - PathSampler::uniform(rng);  // (0, 1]
    t += -std::log(u);
    if (!(t < horizon)) break;
    re.times.push_back(t);
  }
  return re;
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi_square_sf: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), statistic));
}

namespace {

constexpr double kMinExpected = 5.0;

double poisson_pmf(std::size_t k, double lambda) {
  return std::exp(static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0));
}

/// Cells [edges[c], edges[c+1]) over counts, the last one open-ended, each with expected
/// frequency >= kMinExpected under Poisson(lambda) with `total` draws.
std::vector<std::size_t> poisson_cells(double lambda, std::size_t total) {
  double n = static_cast<double>(total);
  std::vector<std::size_t> edges{0};
  double acc = 0.0, cdf = 0.0, tail = n;
  for (std::size_t k = 0; k < 100'000; ++k) {
    double p = poisson_pmf(k, lambda);
    cdf += p;
    acc += n * p;
    tail = n * std::max(0.0, 1.0 - cdf);
    if (tail < kMinExpected) break;
    if (acc >= kMinExpected) {
      edges.push_back(k + 1);
      acc = 0.0;
    }
  }
  if (edges.size() > 1 && acc + tail < kMinExpected) edges.pop_back();
  return edges;
}

std::size_t cell_index(const std::vector<std::size_t>& edges, std::size_t count) {
  auto it = std::upper_bound(edges.begin(), edges.end(), count);
  return static_cast<std::size_t>(std::distance(edges.begin(), it)) - 1;
}

double cell_probability(const std::vector<std::size_t>& edges, std::size_t c, double lambda) {
  if (c + 1 == edges.size()) {
    double below = 0.0;
    for (std::size_t k = 0; k < edges[c]; ++k) below += poisson_pmf(k, lambda);
    return std::max(0.0, 1.0 - below);
  }
  double p = 0.0;
  for (std::size_t k = edges[c]; k < edges[c + 1]; ++k) p += poisson_pmf(k, lambda);
  return p;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  double n = static_cast<double>(xs.size());
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= (n - 1.0);
  return m;
}

/// Contingency chi-square between two categorical columns; categories are merged from the top
/// until every expected cell count is at least kMinExpected.
std::optional<double> independence_p(std::vector<std::size_t> xs, std::vector<std::size_t> ys) {
  std::size_t cx = *std::max_element(xs.begin(), xs.end()) + 1;
  std::size_t cy = *std::max_element(ys.begin(), ys.end()) + 1;
  double n = static_cast<double>(xs.size());
  while (cx >= 2 && cy >= 2) {
    std::vector<double> rx(cx, 0.0), ry(cy, 0.0);
    std::vector<double> table(cx * cy, 0.0);
    for (std::size_t s = 0; s < xs.size(); ++s) {
      std::size_t a = std::min(xs[s], cx - 1), b = std::min(ys[s], cy - 1);
      rx[a] += 1;
      ry[b] += 1;
      table[a * cy + b] += 1;
    }
    double min_expected = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < cx; ++a)
      for (std::size_t b = 0; b < cy; ++b) min_expected = std::min(min_expected, rx[a] * ry[b] / n);
    if (min_expected >= kMinExpected) {
      double stat = 0.0;
      for (std::size_t a = 0; a < cx; ++a)
        for (std::size_t b = 0; b < cy; ++b) {
          double e = rx[a] * ry[b] / n;
          stat += (table[a * cy + b] - e) * (table[a * cy + b] - e) / e;
        }
      return chi_square_sf(stat, static_cast<double>((cx - 1) * (cy - 1)));
    }
    // Merge the lighter side's top category.
    double lx = *std::min_element(rx.begin(), rx.end()), ly = *std::min_element(ry.begin(), ry.end());
    if (lx <= ly)
      --cx;
    else
      --cy;
  }
  return std::nullopt;
}

}  // namespace

GofResult poisson_gof(std::span<const std::vector<std::size_t>> counts, const IntervalUnion& r,
                      const GofThresholds& thresholds) {
  constexpr std::size_t kMinRealizations = 1000;
  if (counts.size() < kMinRealizations) throw DomainError("poisson_gof needs at least 1000 realizations");
  const std::size_t intervals = r.size();
  for (const auto& c : counts)
    if (c.size() != intervals) throw DomainError("poisson_gof: count vectors must match the interval count");
  GofResult out;
  out.passed = true;
  out.marginal_passed = true;
  auto within_band = [&](double ratio) { return std::abs(ratio - 1.0) <= thresholds.dispersion_band; };

  std::vector<double> totals(counts.size(), 0.0);
  for (std::size_t i = 0; i < intervals; ++i) {
    double lambda = r.intervals()[i].hi - r.intervals()[i].lo;
    std::vector<double> column(counts.size());
    for (std::size_t s = 0; s < counts.size(); ++s) {
      column[s] = static_cast<double>(counts[s][i]);
      totals[s] += column[s];
    }
    Moments m = moments(column);
    double ratio = m.mean > 0.0 ? m.variance / m.mean : 0.0;
    out.dispersion.push_back(ratio);
    out.passed = out.passed && within_band(ratio);

    std::vector<std::size_t> edges = poisson_cells(lambda, counts.size());
    if (edges.size() < 2) {
      out.warnings.push_back("interval " + std::to_string(i) + ": too few expected counts for a chi-square test");
      out.chi2_p.push_back(std::numeric_limits<double>::quiet_NaN());
      out.marginal_passed = false;
      continue;
    }
    std::vector<double> observed(edges.size(), 0.0);
    for (std::size_t s = 0; s < counts.size(); ++s) observed[cell_index(edges, counts[s][i])] += 1.0;
    double stat = 0.0;
    double n = static_cast<double>(counts.size());
    for (std::size_t c = 0; c < edges.size(); ++c) {
      double e = n * cell_probability(edges, c, lambda);
      stat += (observed[c] - e) * (observed[c] - e) / e;
    }
    double p = chi_square_sf(stat, static_cast<double>(edges.size() - 1));
    out.chi2_p.push_back(p);
    out.marginal_passed = out.marginal_passed && p > thresholds.p_value;
  }
  Moments total = moments(totals);
  out.total_dispersion = total.mean > 0.0 ? total.variance / total.mean : 0.0;
  out.passed = out.passed && within_band(out.total_dispersion);

  for (std::size_t i = 0; i < intervals; ++i)
    for (std::size_t j = i + 1; j < intervals; ++j) {
      std::vector<std::size_t> xs(counts.size()), ys(counts.size());
      for (std::size_t s = 0; s < counts.size(); ++s) {
        xs[s] = counts[s][i];
        ys[s] = counts[s][j];
      }
      auto p = independence_p(std::move(xs), std::move(ys));
      if (!p) {
        out.warnings.push_back("intervals " + std::to_string(i) + "," + std::to_string(j) +
                               ": degenerate contingency table");
        out.independence_p.push_back(std::numeric_limits<double>::quiet_NaN());
        out.passed = false;
        continue;
      }
      out.independence_p.push_back(*p);
      out.passed = out.passed && *p > thresholds.p_value;
    }
  return out;
}

}  // namespace rsft
