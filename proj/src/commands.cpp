#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rsft/cli.hpp"

namespace rsft::cli {

using Json = nlohmann::ordered_json;

namespace {

Word prefix(const RunConfig& c, std::size_t n) { return Word(c.word.begin(), c.word.begin() + static_cast<std::ptrdiff_t>(n)); }

MCConfig mc_of(const RunConfig& c) { return {c.samples, c.seed, c.workers}; }

Json intervals_json(std::span<const Interval> r) {
  Json out = Json::array();
  for (const Interval& iv : r) out.push_back({iv.lo, iv.hi});
  return out;
}

std::vector<QuadratureNode> measure_grid(const RunConfig& c) {
  const RandomSFT& sft = c.scenario.sft;
  return quadrature_grid(refine(sft.partition(), sft.base(), c.measure.grid.refine_depth),
                         c.measure.grid.points_per_cell);
}

/// A handful of anchors for the engine invariants: the configured omega and an 8-point grid.
std::vector<double> invariant_nodes(const RunConfig& c) {
  std::vector<double> nodes{c.omega};
  for (const QuadratureNode& q : quadrature_grid(IntervalPartition(), 8)) nodes.push_back(q.omega);
  return nodes;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json entry_json(const ReportEntry& e) {
  Json j;
  j["name"] = e.name;
  j["applicable"] = e.applicable;
  j["passed"] = e.passed;
  j["target_kind"] = to_string(e.target_kind);
  j["target"] = e.target;
  j["tolerance"] = e.tolerance;
  j["values"] = e.values;
  j["note"] = e.note;
  return j;
}

Json gof_json(const GofResult& g) {
  Json j;
  j["passed"] = g.passed;
  j["marginal_passed"] = g.marginal_passed;
  j["chi2_p"] = g.chi2_p;
  j["dispersion"] = g.dispersion;
  j["total_dispersion"] = g.total_dispersion;
  j["independence_p"] = g.independence_p;
  j["warnings"] = g.warnings;
  return j;
}

// ---------------------------------------------------------------------------
// Simulation shared by simulate and verify

struct Simulation {
  Simulation(HittingSetup s, Word word) : setup(std::move(s)), y(std::move(word)) {}

  HittingSetup setup;
  Word y;
  WindowConstants r_windows;
  std::vector<std::vector<std::size_t>> r_counts;
  std::vector<std::vector<std::size_t>> sim_counts;
  std::vector<std::size_t> window_counts;
  std::vector<std::vector<std::uint32_t>> hits;
  ZeroProbability zero;
  GofResult gof;
  double window_dispersion = 0.0;
  double window_mean = 0.0;
};

double dispersion_of(const std::vector<std::size_t>& counts, double& mean) {
  double n = static_cast<double>(counts.size());
  mean = 0.0;
  for (auto x : counts) mean += static_cast<double>(x);
  mean /= n;
  double var = 0.0;
  for (auto x : counts) var += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
  var /= n - 1.0;
  return mean > 0.0 ? var / mean : 0.0;
}

Simulation simulate(const RunConfig& c) {
  Word y = prefix(c, c.n);
  CylinderSet a = CylinderSet::single(y);
  IntervalUnion r(c.intervals), sim(c.simulate.intervals), window({c.simulate.dispersion_window});
  double target = std::max({r.sup(), sim.sup(), window.sup()});
  Simulation s{prepare_hitting(c.scenario.sft, c.scenario.potential, c.omega, a, target, c.engine), y};
  const TimeChange& tc = s.setup.time_change;
  s.r_windows = window_constants(tc, r);
  std::size_t horizon = std::max({s.r_windows.k_star, window_constants(tc, sim).k_star, window_constants(tc, window).k_star});
  s.hits = simulate_hits(s.setup.chain, a, std::max<std::size_t>(horizon, 1), mc_of(c));
  std::size_t zeros = 0;
  for (const auto& h : s.hits) {
    PointProcessRealization re = realization_from_hits(tc, h);
    s.r_counts.push_back(counts_in(re, r));
    s.sim_counts.push_back(counts_in(re, sim));
    s.window_counts.push_back(counts_in(re, window)[0]);
    if (std::accumulate(s.r_counts.back().begin(), s.r_counts.back().end(), std::size_t{0}) == 0) ++zeros;
  }
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < s.r_windows.p.size(); ++i)
    for (std::size_t j = s.r_windows.p[i] + 1; j <= s.r_windows.p[i] + s.r_windows.q[i]; ++j) offsets.push_back(j);
  s.zero.mc = wilson_interval(zeros, c.samples);
  s.zero.oracle = no_hit_probability(s.setup.chain, a, offsets);
  s.zero.limit = std::exp(-r.lebesgue());
  if (c.samples >= 1000) s.gof = poisson_gof(s.sim_counts, sim);
  else s.gof.warnings.push_back("goodness of fit needs at least 1000 realizations");
  s.window_dispersion = dispersion_of(s.window_counts, s.window_mean);
  return s;
}

struct ExpLawRow {
  std::size_t n = 0;
  double mc = 0.0;
  double exact = 0.0;
  std::size_t k_max = 0;
};

std::vector<ExpLawRow> exp_law_rows(const RunConfig& c, std::span<const std::size_t> ns) {
  std::vector<ExpLawRow> rows;
  for (std::size_t n : ns) {
    CylinderSet a = CylinderSet::single(prefix(c, n));
    HittingSetup setup =
        prepare_hitting(c.scenario.sft, c.scenario.potential, c.omega, a, c.simulate.exp_law_target, c.engine);
    ExpLawResult mc = exp_law_error(setup, a, mc_of(c), c.simulate.exp_law_target);
    rows.push_back({n, mc.sup_distance, exp_law_error_exact(setup, a, c.simulate.exp_law_target), mc.k_max});
  }
  return rows;
}

Json scenario_json(const RunConfig& c) {
  Json j;
  j["scenario"] = c.scenario.name;
  j["omega"] = c.omega;
  j["word"] = format_word(prefix(c, c.n));
  j["n"] = c.n;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["profile"] = c.profile == Profile::kSmoke ? "smoke" : "full";
  return j;
}

// ---------------------------------------------------------------------------
// Checks

ReportEntry make_entry(std::string name, TargetKind kind, double target, double tolerance) {
  ReportEntry e;
  e.name = std::move(name);
  e.target_kind = kind;
  e.target = target;
  e.tolerance = tolerance;
  return e;
}

ReportEntry oracle_entry(const RunConfig& c) {
  const Scenario& s = c.scenario;
  ReportEntry e = make_entry("oracle_cylinder_measures", TargetKind::kOracle, 0.0, s.oracle_tolerance);
  if (!s.oracle) {
    e.applicable = false;
    e.note = "scenario has no closed-form oracle";
    return e;
  }
  double worst = 0.0;
  for (double omega : invariant_nodes(c))
    for (std::size_t n = 1; n <= c.verify.invariant_n; ++n) {
      CylinderMeasureTable t = measure_table(s.sft, s.potential, omega, n, c.engine);
      for (const auto& [w, p] : t.probs)
        worst = std::max(worst, std::abs(p * c.tamper_cylinder_scale - s.oracle->probability(w)));
    }
  e.values = {worst};
  e.passed = worst <= s.oracle_tolerance;
  e.note = "max |mu_omega(C_n(w)) - closed form| for n <= " + std::to_string(c.verify.invariant_n);
  return e;
}

std::vector<ReportEntry> table_entries(const RunConfig& c) {
  const Scenario& s = c.scenario;
  ReportEntry norm = make_entry("normalization", TargetKind::kExact, 1.0, 1e-10);
  ReportEntry add = make_entry("additivity", TargetKind::kExact, 0.0, 1e-10);
  double worst_norm = 0.0, worst_add = 0.0;
  for (double omega : invariant_nodes(c)) {
    std::optional<CylinderMeasureTable> prev;
    for (std::size_t n = 1; n <= c.verify.invariant_n; ++n) {
      CylinderMeasureTable t = measure_table(s.sft, s.potential, omega, n, c.engine);
      for (auto& [w, p] : t.probs) p *= c.tamper_cylinder_scale;
      worst_norm = std::max(worst_norm, std::abs(t.total() - 1.0));
      if (prev) {
        std::map<Word, double> sums;
        for (const auto& [w, p] : t.probs) sums[Word(w.begin(), w.end() - 1)] += p;
        for (const auto& [w, p] : prev->probs) worst_add = std::max(worst_add, std::abs(sums[w] - p));
      }
      prev = std::move(t);
    }
  }
  norm.values = {worst_norm};
  norm.passed = worst_norm <= 1e-10;
  norm.note = "max |sum_w mu_omega(C_n(w)) - 1|";
  add.values = {worst_add};
  add.passed = worst_add <= 1e-10;
  add.note = "max |sum_a mu(C_{n+1}(wa)) - mu(C_n(w))|";
  return {norm, add};
}

ReportEntry equivariance_entry(const RunConfig& c) {
  const Scenario& s = c.scenario;
  const std::size_t n_max = c.verify.invariant_n;
  const double tol = std::max(1e-8, 10.0 * c.engine.tol);
  ReportEntry e = make_entry("equivariance", TargetKind::kExact, 0.0, tol);
  double worst = 0.0;
  const std::size_t b = s.sft.alphabet_size();
  for (double omega : invariant_nodes(c)) {
    double next = s.sft.base().point(omega, 1);
    FiberChain here = converged_chain(s.sft, s.potential, omega, n_max + 1, c.engine);
    FiberChain there = converged_chain(s.sft, s.potential, next, n_max, c.engine);
    for (std::size_t n = 1; n <= n_max; ++n) {
      CylinderSet words = admissible_words(s.sft, next, n, c.engine.word_cap);
      Word aw(n + 1);
      for (const Word& w : words.words()) {
        std::copy(w.begin(), w.end(), aw.begin() + 1);
        double sum = 0.0;
        for (std::size_t a = 0; a < b; ++a) {
          aw[0] = static_cast<Symbol>(a);
          if (s.sft.allowed(omega, 0, aw[0], w[0])) sum += here.cylinder(0, aw);
        }
        worst = std::max(worst, std::abs(there.cylinder(0, w) * c.tamper_cylinder_scale - sum));
      }
    }
  }
  e.values = {worst};
  e.passed = worst <= tol;
  e.note = "max |mu_{theta omega}(C_n(w)) - sum_a mu_omega(C_{n+1}(aw))| over independent chains, n <= " +
           std::to_string(n_max);
  return e;
}

ReportEntry burn_in_entry(const RunConfig& c) {
  const Scenario& s = c.scenario;
  ReportEntry e = make_entry("burn_in_cauchy", TargetKind::kBound, 0.9, 0.0);
  // Ratios are only meaningful while both gaps sit above rounding.
  constexpr double kFloor = 1e-13;
  double worst = 0.0;
  std::size_t ratios = 0;
  for (double omega : invariant_nodes(c)) {
    double prev_gap = -1.0;
    FiberChain prev(s.sft, s.potential, omega, c.verify.invariant_n, 8);
    for (std::size_t m = 16; m <= 512; m *= 2) {
      FiberChain cur(s.sft, s.potential, omega, c.verify.invariant_n, m);
      double gap = cur.distance(prev);
      if (m >= 64 && prev_gap > kFloor && gap > kFloor) {
        worst = std::max(worst, gap / prev_gap);
        ++ratios;
      }
      prev_gap = gap;
      prev = std::move(cur);
    }
  }
  e.values = {worst, static_cast<double>(ratios)};
  e.passed = worst < 0.9;
  e.note = "largest ratio of successive burn-in gaps for m >= 32 (gaps above 1e-13); values = {ratio, count}";
  return e;
}

ReportEntry positivity_entry(const RunConfig& c) {
  ReportEntry e = make_entry("positive_measure", TargetKind::kBound, 0.0, 0.0);
  Word y = prefix(c, c.n);
  auto cell = positive_measure_cell(c.scenario.sft, y);
  if (!cell) {
    e.values = {0.0};
    e.note = "no cell of positive length admits y_n";
    return e;
  }
  double mid = 0.5 * (cell->lo + cell->hi);
  double mu = cylinder_measure(c.scenario.sft, c.scenario.potential, mid, y, c.engine).probability;
  e.values = {(cell->hi - cell->lo) * mu, cell->lo, cell->hi, mu};
  e.passed = mu > 0.0 && cell->hi > cell->lo;
  e.note = "cell of refine(partition, n) admitting y_n and mu_omega(C_n(y)) at its midpoint; values = {length x mu, lo, hi, mu}";
  return e;
}

ReportEntry qn_entry(const RunConfig& c) {
  ReportEntry e = make_entry("q_n_growth", TargetKind::kExact, static_cast<double>(c.n), 0.0);
  bool monotone = true;
  std::size_t prev = 0;
  for (std::size_t m = 1; m <= c.n; ++m) {
    std::size_t q = min_return_q(prefix(c, m));
    e.values.push_back(static_cast<double>(q));
    monotone = monotone && q >= prev;
    prev = q;
  }
  e.passed = monotone && prev == c.n;
  e.note = "q_m for m = 1..n; reaches n and never decreases";
  return e;
}

std::vector<ReportEntry> bound_entries(const RunConfig& c) {
  const Scenario& s = c.scenario;
  std::vector<ReportEntry> out;
  // Expected-count and K bounds on every configured interval union and each simulated word length.
  std::vector<std::size_t> ns{c.n};
  for (std::size_t n : c.simulate.exp_law_n)
    if (std::find(ns.begin(), ns.end(), n) == ns.end()) ns.push_back(n);
  std::vector<std::vector<Interval>> unions{c.intervals, c.simulate.intervals};
  ReportEntry k1 = make_entry("k1_expected_count", TargetKind::kBound, 0.0, 0.0);
  ReportEntry kb = make_entry("k_term_bound", TargetKind::kBound, 0.0, 0.0);
  std::size_t k1_violations = 0, kb_violations = 0, k1_runs = 0, kb_runs = 0;
  double k1_slack = std::numeric_limits<double>::infinity(), kb_slack = std::numeric_limits<double>::infinity();
  for (std::size_t n : ns) {
    CylinderSet a = CylinderSet::single(prefix(c, n));
    for (const auto& ivs : unions) {
      IntervalUnion r(ivs);
      HittingSetup setup = prepare_hitting(s.sft, s.potential, c.omega, a, r.sup(), c.engine);
      WindowConstants wc = window_constants(setup.time_change, r);
      ReportEntry one = check_k1_exact(setup.time_change, wc, r);
      ++k1_runs;
      if (!one.passed) ++k1_violations;
      k1_slack = std::min(k1_slack, one.values[2] - one.values[1]);
      for (std::size_t g : {std::size_t{1}, n, 2 * n}) {
        std::size_t length = wc.k_star + g + n + 1;
        FiberChain chain = converged_chain(s.sft, s.potential, c.omega, length, c.engine);
        double eps = 0.0;
        for (std::size_t i = 1; i <= wc.k_star + g; ++i) eps = std::max(eps, chain.cylinder_set(i, a));
        GhkTerms terms = ghk_terms(chain, a, wc.k_star, g, 0.0);
        ReportEntry kk = check_k_bound(terms, g, eps, r.sup());
        ++kb_runs;
        if (!kk.passed) ++kb_violations;
        kb_slack = std::min(kb_slack, kk.values[1] - kk.values[0]);
      }
    }
  }
  k1.values = {static_cast<double>(k1_violations), static_cast<double>(k1_runs), k1_slack};
  k1.passed = k1_violations == 0;
  k1.note = "|E N(R) - Leb(R)| <= 2 r eps(A) on every instance; values = {violations, instances, min slack}";
  kb.values = {static_cast<double>(kb_violations), static_cast<double>(kb_runs), kb_slack};
  kb.passed = kb_violations == 0;
  kb.note = "K <= g eps(A) sup R at k = k*, g in {1, n, 2n}; values = {violations, instances, min slack}";
  out.push_back(k1);
  out.push_back(kb);

  // Product inequality on random draws.
  ReportEntry prod = make_entry("product_inequality", TargetKind::kBound, 0.0, 0.0);
  std::size_t violations = 0;
  auto rng = make_stream(c.seed, 0xC0FFEE);
  std::vector<double> xs;
  for (std::size_t d = 0; d < c.verify.product_draws; ++d) {
    double eps = 0.5 * (1.0 - PathSampler::uniform(rng));  // (0, 1/2]
    std::size_t count = 1 + static_cast<std::size_t>(PathSampler::uniform(rng) * 50.0);
    xs.clear();
    for (std::size_t i = 0; i < count; ++i) xs.push_back(eps * PathSampler::uniform(rng));
    if (!product_inequality_check(xs, eps)) ++violations;
  }
  prod.values = {static_cast<double>(violations), static_cast<double>(c.verify.product_draws)};
  prod.passed = violations == 0;
  prod.note = "exp(-(1+2e) sum x) <= prod(1-x) <= exp(-(1-2e) sum x); values = {violations, draws}";
  out.push_back(prod);

  // Decomposition and telescoping inequalities, exactly, at tiny scale.
  CylinderSet tiny = CylinderSet::single(prefix(c, std::min<std::size_t>(2, c.word.size())));
  const std::size_t k = c.verify.tiny_k;
  FiberChain chain = converged_chain(s.sft, s.potential, c.omega, 2 * k + tiny.depth() + 1, c.engine);
  ReportEntry dec = make_entry("ghk_decomposition", TargetKind::kBound, 0.0, 1e-13);
  std::size_t dec_violations = 0;
  double dec_slack = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g <= k; ++g) {
    ReportEntry one = check_decomposition(chain, tiny, k, g);
    if (!one.passed) ++dec_violations;
    dec_slack = std::min(dec_slack, one.values[1] - one.values[0]);
  }
  dec.values = {static_cast<double>(dec_violations), static_cast<double>(k + 1), dec_slack};
  dec.passed = dec_violations == 0;
  dec.note = "sum_i Delta(A, k-i) <= G + H + K exactly, k = " + std::to_string(k) +
             ", g = 0..k, A = C_2(y); values = {violations, instances, min slack}";
  out.push_back(dec);

  ReportEntry tel = make_entry("void_probability_telescoping", TargetKind::kBound, 0.0, 1e-13);
  IntervalUnion r_tiny({c.verify.tiny_interval});
  HittingSetup setup = prepare_hitting(s.sft, s.potential, c.omega, tiny, r_tiny.sup(), c.engine);
  try {
    tel = check_telescoping(setup.chain, tiny, setup.time_change, r_tiny);
  } catch (const CapExceeded& ex) {
    tel.applicable = false;
    tel.note = std::string("k* too large for exact Delta: ") + ex.what();
  }
  out.push_back(tel);
  return out;
}

std::vector<ReportEntry> mc_entries(const RunConfig& c) {
  std::vector<ReportEntry> out;
  Simulation sim = simulate(c);
  IntervalUnion r(c.intervals);

  ReportEntry k2 = make_entry("k2_zero_probability", TargetKind::kLimit, sim.zero.limit, 0.02);
  double dev = std::abs(sim.zero.mc.estimate - sim.zero.limit);
  bool covers = sim.zero.oracle >= sim.zero.mc.lower && sim.zero.oracle <= sim.zero.mc.upper;
  k2.values = {sim.zero.mc.estimate, sim.zero.mc.lower, sim.zero.mc.upper, sim.zero.oracle, dev};
  k2.passed = dev <= 0.02 && covers;
  k2.note = "|P(N(R)=0) - exp(-Leb R)| <= 0.02 and the absorption oracle inside the 95% Wilson interval; "
            "values = {estimate, lower, upper, oracle, deviation}";
  out.push_back(k2);

  ReportEntry disp = make_entry("dispersion", TargetKind::kLimit, 1.0, 0.1);
  disp.values = {sim.window_dispersion, sim.window_mean};
  disp.passed = std::abs(sim.window_dispersion - 1.0) <= 0.1;
  disp.note = "variance / mean of counts in the dispersion window; values = {ratio, mean}";
  out.push_back(disp);

  ReportEntry gof = make_entry("poisson_independence", TargetKind::kLimit, 0.01, 0.0);
  ReportEntry marginal = make_entry("poisson_marginals", TargetKind::kLimit, 1.0, 0.1);
  if (sim.gof.chi2_p.empty() && !sim.gof.warnings.empty()) {
    gof.applicable = marginal.applicable = false;
    gof.note = marginal.note = sim.gof.warnings.front();
  } else {
    gof.values = sim.gof.independence_p;
    bool ok = true;
    for (double p : gof.values) ok = ok && p > 0.01;
    gof.passed = ok;
    gof.note = "chi-square independence p-values of counts on each pair of disjoint intervals, all > 0.01";
    if (gof.values.empty()) {
      gof.applicable = false;
      gof.note = "a single interval has no pairs";
    }
    marginal.values = sim.gof.dispersion;
    marginal.values.insert(marginal.values.end(), sim.gof.chi2_p.begin(), sim.gof.chi2_p.end());
    marginal.passed = true;
    for (double d : sim.gof.dispersion) marginal.passed = marginal.passed && std::abs(d - 1.0) <= 0.1;
    marginal.note = "variance / mean per interval within [0.9, 1.1]; values = ratios then Poisson histogram "
                    "chi-square p-values (diagnostic, resolves finite-n bias at large N)";
  }
  out.push_back(gof);
  out.push_back(marginal);

  ReportEntry law = make_entry("exp_law", TargetKind::kLimit, 0.0, 0.05);
  std::vector<ExpLawRow> rows = exp_law_rows(c, c.simulate.exp_law_n);
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    law.values.push_back(rows[i].mc);
    if (i > 0) decreasing = decreasing && rows[i].mc < rows[i - 1].mc;
  }
  for (const auto& row : rows) law.values.push_back(row.exact);
  law.passed = decreasing && !rows.empty() && rows.back().mc < 0.05;
  std::ostringstream note;
  note << "sup_k |P(tau > k) - exp(-T^k)| for n in {";
  for (std::size_t i = 0; i < rows.size(); ++i) note << (i ? "," : "") << rows[i].n;
  note << "}: strictly decreasing and last < 0.05; values = Monte-Carlo distances then exact distances";
  law.note = note.str();
  out.push_back(law);
  return out;
}

/// OLS slope of y on x and its standard error.
std::pair<double, double> slope_with_error(std::span<const double> x, std::span<const double> y) {
  LinearFit fit = fit_line(x, y);
  double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double sxx = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    double r = y[i] - (fit.slope * x[i] + fit.intercept);
    sse += r * r;
  }
  return {fit.slope, std::sqrt(sse / (n - 2.0) / sxx)};
}

// phi below this level is rounding noise of an exactly independent system.
constexpr double kPhiFloor = 1e-15;

std::vector<ReportEntry> estimator_entries(const RunConfig& c) {
  const Scenario& s = c.scenario;
  std::vector<ReportEntry> out;
  auto grid = measure_grid(c);

  ReportEntry eps = make_entry("epsilon_decay", TargetKind::kBound, 0.95, 0.0);
  DecaySeries dec = epsilon_decay(s.sft, s.potential, c.measure.epsilon_min, c.measure.epsilon_max, grid, c.engine);
  bool nonincreasing = true;
  for (std::size_t i = 1; i < dec.epsilon.size(); ++i) nonincreasing = nonincreasing && dec.epsilon[i] <= dec.epsilon[i - 1];
  eps.values = {dec.fit.slope, dec.fit.r_squared};
  eps.passed = nonincreasing && dec.fit.slope < 0.0 && dec.fit.r_squared > 0.95;
  eps.note = "ln eps(n) fit: slope < 0, R^2 > 0.95, eps nonincreasing; values = {slope, R^2}";
  out.push_back(eps);

  ReportEntry phi = make_entry("phi_mixing", TargetKind::kBound, 0.9, 0.0);
  std::vector<std::size_t> gaps(c.measure.phi_gap_max + 1);
  std::iota(gaps.begin(), gaps.end(), std::size_t{0});
  PhiSeries ph = estimate_phi(s.sft, s.potential, c.omega, c.measure.phi_n, c.measure.phi_m, gaps, c.engine);
  std::vector<double> clipped;
  for (double v : ph.phi) clipped.push_back(v < kPhiFloor ? 0.0 : v);
  bool phi_monotone = true;
  for (std::size_t i = 1; i < clipped.size(); ++i) phi_monotone = phi_monotone && clipped[i] <= clipped[i - 1];
  std::vector<double> x, y;
  for (std::size_t i = 0; i < clipped.size(); ++i)
    if (clipped[i] > 0.0) {
      x.push_back(static_cast<double>(gaps[i]));
      y.push_back(std::log(clipped[i]));
    }
  if (x.empty()) {
    phi.values = {0.0};
    phi.passed = true;
    phi.note = "phi(g) vanishes to rounding for every g (exact independence)";
  } else {
    LinearFit fit = x.size() >= 2 ? fit_line(x, y) : LinearFit{};
    phi.values = {fit.slope, fit.r_squared, clipped.front()};
    phi.passed = phi_monotone && x.size() >= 2 && fit.slope < 0.0 && fit.r_squared > 0.9;
    phi.note = "phi(g) nonincreasing on g = 0.." + std::to_string(c.measure.phi_gap_max) +
               " with ln phi fit slope < 0, R^2 > 0.9; values = {slope, R^2, phi(0)}";
  }
  out.push_back(phi);

  ReportEntry beta = make_entry("beta_returns", TargetKind::kBound, 0.0, 0.0);
  BetaSeries be = estimate_beta(s.sft, s.potential, grid, c.word, c.measure.beta_min, c.measure.beta_max, c.engine);
  double s0 = be.fit0 ? be.fit0->slope : 0.0, s1 = be.fit1 ? be.fit1->slope : 0.0;
  beta.values = {s0, s1, static_cast<double>(be.skipped)};
  beta.passed = (!be.fit0 || s0 < 0.0) && (!be.fit1 || s1 < 0.0) && (be.fit0 || be.fit1);
  beta.note = "fitted rates of ln beta0(j) and ln beta1(n) negative; values = {rate0, rate1, skipped fibers}";
  out.push_back(beta);

  ReportEntry dist = make_entry("distortion", TargetKind::kBound, 1.0, 0.0);
  std::vector<double> dx, dy;
  double lowest = std::numeric_limits<double>::infinity(), highest = 0.0;
  std::vector<double> anchors{c.omega};
  for (const QuadratureNode& q : quadrature_grid(IntervalPartition(), 4)) anchors.push_back(q.omega);
  for (double omega : anchors)
    for (std::size_t n = 1; n <= c.measure.distortion_max; ++n)
      for (std::size_t m = 1; m <= c.measure.distortion_max; ++m) {
        double value = distortion_constant(s.sft, s.potential, omega, n, m, 200'000, c.seed, c.engine);
        lowest = std::min(lowest, value);
        highest = std::max(highest, value);
        dx.push_back(static_cast<double>(n + m));
        dy.push_back(std::log(value));
      }
  auto [slope, se] = slope_with_error(dx, dy);
  dist.values = {highest, lowest, slope, se};
  dist.passed = lowest >= 1.0 && std::abs(slope) <= 2.0 * se + 1e-12;
  dist.note = "c >= 1 and the slope of ln c against n+m within two standard errors of 0; "
              "values = {max c, min c, slope, standard error}";
  out.push_back(dist);
  return out;
}

std::vector<ReportEntry> scenario_entries(const RunConfig& c) {
  std::vector<ReportEntry> out;
  std::vector<QuadratureNode> grid = quadrature_grid(IntervalPartition(), 16);
  out.push_back(symmetry_check(c.scenario, c.verify.symmetry_n, grid, 1e-6, c.engine));

  ReportEntry nm;
  nm.name = "nonmixing_jensen_gap";
  if (!respects_symmetry(c.scenario)) {
    nm.applicable = false;
    nm.note = "the scenario does not carry the half-turn symmetry";
  } else {
    NonmixingOptions opts;
    opts.refine_depth = c.verify.nonmixing_depth;
    opts.points_per_cell = c.verify.nonmixing_points;
    opts.engine = c.engine;
    NonmixingResult res = nonmixing_gap(c.scenario, opts);
    if (res.support_measure > 1.0 - 1e-9) {
      nm.applicable = false;
      nm.values = {res.gap, res.quadrature_error};
      nm.note = "omega -> mu_omega(C_2(12)) has full support; no Jensen gap to exhibit";
    } else {
      nm = nonmixing_entry(res);
    }
  }
  out.push_back(nm);
  return out;
}

}  // namespace

VerificationReport build_report(const RunConfig& c) {
  VerificationReport report;
  auto add_all = [&](std::vector<ReportEntry> entries) {
    for (auto& e : entries) report.add(std::move(e));
  };
  report.add(oracle_entry(c));
  add_all(table_entries(c));
  report.add(equivariance_entry(c));
  report.add(burn_in_entry(c));
  report.add(positivity_entry(c));
  report.add(qn_entry(c));
  add_all(bound_entries(c));
  add_all(mc_entries(c));
  add_all(estimator_entries(c));
  add_all(scenario_entries(c));
  return report;
}

CommandResult cmd_describe(const RunConfig& c) {
  const Scenario& s = c.scenario;
  const RandomSFT& sft = s.sft;
  Json j;
  j["scenario"] = s.name;
  j["notes"] = s.notes;
  j["alphabet_size"] = sft.alphabet_size();
  j["angle"] = sft.base().angle();
  j["partition"] = std::vector<double>(sft.partition().breakpoints().begin(), sft.partition().breakpoints().end());
  Json cells = Json::array();
  for (std::size_t i = 0; i < sft.partition().size(); ++i) {
    Json cell;
    cell["begin"] = sft.partition().cell_begin(i);
    cell["end"] = sft.partition().cell_end(i);
    Json rows = Json::array();
    const BoolMatrix& m = sft.cell_matrices()[i];
    for (std::size_t u = 0; u < m.size(); ++u) {
      std::string row;
      for (std::size_t v = 0; v < m.size(); ++v) row += m(u, v) ? '1' : '0';
      rows.push_back(row);
    }
    cell["matrix"] = rows;
    cells.push_back(cell);
  }
  j["cells"] = cells;
  Json psi;
  psi["depth"] = s.potential.depth();
  psi["partition"] =
      std::vector<double>(s.potential.partition().breakpoints().begin(), s.potential.partition().breakpoints().end());
  psi["values"] = std::vector<std::vector<double>>(s.potential.cell_values().begin(), s.potential.cell_values().end());
  j["potential"] = psi;
  auto m = aperiodicity_constant(sft, 16);
  j["aperiodicity_constant"] = m ? Json(*m) : Json(nullptr);
  j["symmetric"] = respects_symmetry(s);
  j["designated_word"] = format_word(c.word);
  Json qs = Json::array();
  for (std::size_t n = 1; n <= std::min<std::size_t>(16, c.word.size()); ++n)
    qs.push_back(Json{{"n", n}, {"q", min_return_q(prefix(c, n))}});
  j["q_n"] = qs;
  auto cell = positive_measure_cell(sft, prefix(c, c.n));
  j["positive_measure_cell"] = cell ? Json::array({cell->lo, cell->hi}) : Json(nullptr);
  j["intervals"] = intervals_json(c.intervals);
  CommandResult out;
  out.stdout_text = dump(j);
  out.files["describe.json"] = out.stdout_text;
  return out;
}

CommandResult cmd_measure(const RunConfig& c) {
  const Scenario& s = c.scenario;
  std::ostringstream csv;
  csv << "series,key,value\n";
  auto row = [&](const std::string& series, const std::string& key, double value) {
    csv << series << ',' << key << ',' << format_number(value) << '\n';
  };
  for (std::size_t n = 1; n <= c.measure.table_depth; ++n) {
    CylinderMeasureTable t = measure_table(s.sft, s.potential, c.omega, n, c.engine);
    for (const auto& [w, p] : t.probs) row("cylinder", format_word(w), p);
  }
  auto grid = measure_grid(c);
  DecaySeries dec = epsilon_decay(s.sft, s.potential, c.measure.epsilon_min, c.measure.epsilon_max, grid, c.engine);
  for (std::size_t i = 0; i < dec.n.size(); ++i) row("epsilon", std::to_string(dec.n[i]), dec.epsilon[i]);
  row("epsilon_fit", "slope", dec.fit.slope);
  row("epsilon_fit", "r_squared", dec.fit.r_squared);
  std::vector<std::size_t> gaps(c.measure.phi_gap_max + 1);
  std::iota(gaps.begin(), gaps.end(), std::size_t{0});
  PhiSeries ph = estimate_phi(s.sft, s.potential, c.omega, c.measure.phi_n, c.measure.phi_m, gaps, c.engine);
  for (std::size_t i = 0; i < ph.gaps.size(); ++i) row("phi", std::to_string(ph.gaps[i]), ph.phi[i]);
  row("phi_fit", "slope", ph.fit.slope);
  row("phi_fit", "r_squared", ph.fit.r_squared);
  BetaSeries be = estimate_beta(s.sft, s.potential, grid, c.word, c.measure.beta_min, c.measure.beta_max, c.engine);
  for (std::size_t i = 0; i < be.j.size(); ++i) row("beta0", std::to_string(be.j[i]), be.beta0[i]);
  for (std::size_t i = 0; i < be.n.size(); ++i) row("beta1", std::to_string(be.n[i]), be.beta1[i]);
  if (be.fit0) row("beta_fit", "rate0", be.fit0->slope);
  if (be.fit1) row("beta_fit", "rate1", be.fit1->slope);
  row("beta_fit", "skipped", static_cast<double>(be.skipped));
  for (std::size_t n = 1; n <= c.measure.distortion_max; ++n)
    for (std::size_t m = 1; m <= c.measure.distortion_max; ++m)
      row("distortion", std::to_string(n) + ":" + std::to_string(m),
          distortion_constant(s.sft, s.potential, c.omega, n, m, 200'000, c.seed, c.engine));
  CommandResult out;
  out.stdout_text = csv.str();
  out.files["measure.csv"] = out.stdout_text;
  return out;
}

CommandResult cmd_simulate(const RunConfig& c) {
  Simulation sim = simulate(c);
  const TimeChange& tc = sim.setup.time_change;
  Json j = scenario_json(c);
  Json t;
  t["horizon"] = tc.horizon();
  t["total"] = tc.partial.back();
  t["max_step"] = tc.max_step();
  t["burn_in"] = sim.setup.chain.burn_in();
  j["time_change"] = t;
  Json w;
  w["intervals"] = intervals_json(c.intervals);
  w["p"] = sim.r_windows.p;
  w["q"] = sim.r_windows.q;
  w["k_star"] = sim.r_windows.k_star;
  j["windows"] = w;
  Json z;
  z["estimate"] = sim.zero.mc.estimate;
  z["wilson_lower"] = sim.zero.mc.lower;
  z["wilson_upper"] = sim.zero.mc.upper;
  z["oracle"] = sim.zero.oracle;
  z["limit"] = sim.zero.limit;
  j["zero_probability"] = z;
  Json counts;
  counts["intervals"] = intervals_json(c.simulate.intervals);
  std::vector<double> means(c.simulate.intervals.size(), 0.0);
  for (const auto& row : sim.sim_counts)
    for (std::size_t i = 0; i < row.size(); ++i) means[i] += static_cast<double>(row[i]) / static_cast<double>(c.samples);
  counts["mean"] = means;
  counts["gof"] = gof_json(sim.gof);
  counts["dispersion_window"] = Json::array({c.simulate.dispersion_window.lo, c.simulate.dispersion_window.hi});
  counts["window_mean"] = sim.window_mean;
  counts["window_dispersion"] = sim.window_dispersion;
  j["counts"] = counts;
  std::vector<std::size_t> ns{c.n};
  std::vector<ExpLawRow> rows = exp_law_rows(c, ns);
  Json law;
  law["k_max"] = rows[0].k_max;
  law["sup_distance"] = rows[0].mc;
  law["exact_sup_distance"] = rows[0].exact;
  j["exp_law"] = law;

  CommandResult out;
  out.stdout_text = dump(j);
  out.files["simulate.json"] = out.stdout_text;
  std::ostringstream csv;
  csv << "sample";
  for (std::size_t i = 0; i < c.simulate.intervals.size(); ++i) csv << ",count_" << i;
  csv << ",window_count,first_hit\n";
  for (std::size_t s = 0; s < sim.hits.size(); ++s) {
    csv << s;
    for (auto v : sim.sim_counts[s]) csv << ',' << v;
    csv << ',' << sim.window_counts[s] << ',';
    if (!sim.hits[s].empty()) csv << sim.hits[s].front();
    csv << '\n';
  }
  out.files["realizations.csv"] = csv.str();
  return out;
}

CommandResult cmd_verify(const RunConfig& c) {
  VerificationReport report = build_report(c);
  Json j = scenario_json(c);
  std::size_t passed = 0, failed = 0, inapplicable = 0;
  Json entries = Json::array(), skipped = Json::array();
  for (const ReportEntry& e : report.entries) {
    if (!e.applicable) {
      ++inapplicable;
      skipped.push_back(entry_json(e));
      continue;
    }
    (e.passed ? passed : failed)++;
    entries.push_back(entry_json(e));
  }
  j["passed"] = report.all_passed();
  j["summary"] = Json{{"passed", passed}, {"failed", failed}, {"inapplicable", inapplicable}};
  j["entries"] = entries;
  j["inapplicable"] = skipped;
  CommandResult out;
  out.exit_code = report.all_passed() ? kPass : kCheckFailure;
  out.stdout_text = dump(j);
  out.files["verify.json"] = out.stdout_text;
  return out;
}

CommandResult run_command(const std::string& command, const RunConfig& config, std::string& error) {
  try {
    if (command == "describe") return cmd_describe(config);
    if (command == "measure") return cmd_measure(config);
    if (command == "simulate") return cmd_simulate(config);
    if (command == "verify") return cmd_verify(config);
    error = "unknown command '" + command + "'";
    return {kConfigError, {}, {}};
  } catch (const ConvergenceError& e) {
    error = std::string("non-convergence: ") + e.what();
    return {kNonConvergence, {}, {}};
  } catch (const HorizonError& e) {
    error = std::string("non-convergence: ") + e.what();
    return {kNonConvergence, {}, {}};
  } catch (const CapExceeded& e) {
    error = std::string("configuration exceeds a cap: ") + e.what();
    return {kConfigError, {}, {}};
  } catch (const DomainError& e) {
    error = std::string("invalid configuration: ") + e.what();
    return {kConfigError, {}, {}};
  } catch (const ConfigError& e) {
    error = e.what();
    return {kConfigError, {}, {}};
  }
}

}  // namespace rsft::cli
