#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rsft/cli.hpp"

namespace rsft::cli {

using Json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where.empty() ? what : where + ": " + what);
}

void reject_unknown(const Json& object, const std::string& where, std::initializer_list<const char*> known) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : object.items())
    if (!allowed.count(item.key())) fail(where, "unknown key '" + item.key() + "'");
}

const Json& require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return j;
}

double to_double(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::uint64_t to_unsigned(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  fail(where, "expected a nonnegative integer");
}

std::string to_string(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

template <class T, class Read>
void read_if(const Json& obj, const char* key, T& target, const std::string& where, Read read) {
  auto it = obj.find(key);
  if (it != obj.end()) target = static_cast<T>(read(*it, where + "." + key));
}

void read_double(const Json& obj, const char* key, double& target, const std::string& where) {
  read_if(obj, key, target, where, to_double);
}

template <class T>
void read_count(const Json& obj, const char* key, T& target, const std::string& where) {
  read_if(obj, key, target, where, to_unsigned);
}

Interval to_interval(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected an interval [lo, hi]");
  return {to_double(j[0], where + "[0]"), to_double(j[1], where + "[1]")};
}

std::vector<Interval> to_intervals(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty list of intervals");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_interval(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> to_counts(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty list of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(static_cast<std::size_t>(to_unsigned(j[i], where + "[" + std::to_string(i) + "]")));
  return out;
}

std::pair<std::size_t, std::size_t> to_range(const Json& j, const std::string& where) {
  auto v = to_counts(j, where);
  if (v.size() != 2 || v[0] > v[1]) fail(where, "expected a range [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

std::vector<double> to_doubles(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_double(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

BoolMatrix to_matrix(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a matrix (list of rows)");
  std::vector<std::vector<int>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    std::string rw = where + "[" + std::to_string(i) + "]";
    std::vector<int> r;
    if (row.is_string()) {
      for (char c : row.get<std::string>()) r.push_back(c == '1' ? 1 : c == '0' ? 0 : -1);
    } else if (row.is_array()) {
      for (const Json& e : row) r.push_back(e.is_number_integer() ? e.get<int>() : -1);
    } else {
      fail(rw, "expected a row of 0/1 entries");
    }
    rows.push_back(std::move(r));
  }
  return BoolMatrix::from_rows(rows);
}

Scenario inline_scenario(const Json& j) {
  const std::string where = "scenario";
  require_object(j, where);
  reject_unknown(j, where, {"name", "angle", "partition", "matrices", "potential", "word", "notes"});
  double angle = kDefaultAngle;
  read_double(j, "angle", angle, where);
  std::vector<double> breakpoints{0.0};
  if (j.contains("partition")) breakpoints = to_doubles(j["partition"], where + ".partition");
  if (!j.contains("matrices")) fail(where, "inline scenario needs 'matrices'");
  const Json& ms = j["matrices"];
  if (!ms.is_array()) fail(where + ".matrices", "expected one matrix per partition cell");
  std::vector<BoolMatrix> matrices;
  for (std::size_t i = 0; i < ms.size(); ++i)
    matrices.push_back(to_matrix(ms[i], where + ".matrices[" + std::to_string(i) + "]"));
  RandomSFT sft(BaseRotation(angle, "rotation"), IntervalPartition(breakpoints), std::move(matrices));
  const std::size_t b = sft.alphabet_size();

  Potential psi = Potential::zero(b);
  if (j.contains("potential") && !(j["potential"].is_string() && j["potential"] == "zero")) {
    const Json& p = require_object(j["potential"], where + ".potential");
    reject_unknown(p, where + ".potential", {"depth", "partition", "values", "holder_a", "holder_r"});
    std::size_t depth = 2;
    read_count(p, "depth", depth, where + ".potential");
    std::vector<double> pb{0.0};
    if (p.contains("partition")) pb = to_doubles(p["partition"], where + ".potential.partition");
    if (!p.contains("values") || !p["values"].is_array()) fail(where + ".potential", "needs 'values' per cell");
    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < p["values"].size(); ++i)
      values.push_back(to_doubles(p["values"][i], where + ".potential.values[" + std::to_string(i) + "]"));
    double a = 0.0, r = 0.5;
    read_double(p, "holder_a", a, where + ".potential");
    read_double(p, "holder_r", r, where + ".potential");
    psi = Potential(b, depth, IntervalPartition(pb), std::move(values), a, r);
  }
  std::string name = "inline";
  if (j.contains("name")) name = to_string(j["name"], where + ".name");
  Word y = designated_word(b, 64);
  bool claimed = true;
  if (j.contains("word")) {
    y = parse_word(to_string(j["word"], where + ".word"));
    claimed = min_return_q(y) == y.size();
  }
  std::string notes;
  if (j.contains("notes")) notes = to_string(j["notes"], where + ".notes");
  return Scenario{name, std::move(sft), std::move(psi), std::move(y), claimed, notes, std::nullopt, 0.0};
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

Profile parse_profile(const std::string& name) {
  if (name == "smoke") return Profile::kSmoke;
  if (name == "full") return Profile::kFull;
  throw ConfigError("profile must be 'smoke' or 'full', got '" + name + "'");
}

RunConfig parse_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    auto pos = msg.find("] ");
    throw ConfigError("config parse error at " + locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                      (pos == std::string::npos ? msg : msg.substr(pos + 2)));
  }
  require_object(root, "config");
  reject_unknown(root, "config",
                 {"scenario", "omega", "word", "n", "intervals", "samples", "seed", "workers", "engine", "measure",
                  "simulate", "verify", "profile", "tamper"});
  if (!root.contains("scenario")) fail("config", "missing 'scenario'");
  if (!root.contains("seed")) fail("config", "missing 'seed' (no nondeterministic default)");
  const Json& s = root["scenario"];
  std::optional<RunConfig> built;
  try {
    built.emplace(s.is_string() ? builtin_scenario(s.get<std::string>()) : inline_scenario(s));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  RunConfig& c = *built;
  c.scenario_ref = s.is_string() ? s.get<std::string>() : "inline";
  try {
    read_double(root, "omega", c.omega, "omega");
    if (!(c.omega >= 0.0 && c.omega < 1.0)) fail("omega", "must lie in [0, 1)");
    if (root.contains("word")) c.word = parse_word(to_string(root["word"], "word"));
    for (Symbol sym : c.word)
      if (sym >= c.scenario.sft.alphabet_size()) fail("word", "symbol outside the alphabet");
    read_count(root, "n", c.n, "n");
    if (c.n == 0 || c.n > c.word.size()) fail("n", "must lie in 1..|word|");
    if (root.contains("intervals")) c.intervals = to_intervals(root["intervals"], "intervals");
    read_count(root, "samples", c.samples, "samples");
    if (c.samples == 0) fail("samples", "must be >= 1");
    c.seed = to_unsigned(root["seed"], "seed");
    read_count(root, "workers", c.workers, "workers");
    if (c.workers == 0) fail("workers", "must be >= 1");

    if (root.contains("engine")) {
      const Json& e = require_object(root["engine"], "engine");
      reject_unknown(e, "engine", {"tol", "initial_burn_in", "max_burn_in", "max_word_length", "word_cap"});
      read_double(e, "tol", c.engine.tol, "engine");
      read_count(e, "initial_burn_in", c.engine.initial_burn_in, "engine");
      read_count(e, "max_burn_in", c.engine.max_burn_in, "engine");
      read_count(e, "max_word_length", c.engine.max_word_length, "engine");
      read_count(e, "word_cap", c.engine.word_cap, "engine");
      if (!(c.engine.tol > 0.0)) fail("engine.tol", "must be positive");
    }
    if (root.contains("measure")) {
      const Json& m = require_object(root["measure"], "measure");
      reject_unknown(m, "measure",
                     {"table_depth", "epsilon_n", "phi_n", "phi_m", "phi_gap_max", "beta_n", "distortion_max", "grid"});
      auto& ms = c.measure;
      read_count(m, "table_depth", ms.table_depth, "measure");
      if (m.contains("epsilon_n")) std::tie(ms.epsilon_min, ms.epsilon_max) = to_range(m["epsilon_n"], "measure.epsilon_n");
      if (m.contains("beta_n")) std::tie(ms.beta_min, ms.beta_max) = to_range(m["beta_n"], "measure.beta_n");
      read_count(m, "phi_n", ms.phi_n, "measure");
      read_count(m, "phi_m", ms.phi_m, "measure");
      read_count(m, "phi_gap_max", ms.phi_gap_max, "measure");
      read_count(m, "distortion_max", ms.distortion_max, "measure");
      if (m.contains("grid")) {
        const Json& g = require_object(m["grid"], "measure.grid");
        reject_unknown(g, "measure.grid", {"refine_depth", "points_per_cell"});
        read_count(g, "refine_depth", ms.grid.refine_depth, "measure.grid");
        read_count(g, "points_per_cell", ms.grid.points_per_cell, "measure.grid");
      }
      if (ms.beta_max > c.word.size()) fail("measure.beta_n", "exceeds the designated word length");
    }
    if (root.contains("simulate")) {
      const Json& m = require_object(root["simulate"], "simulate");
      reject_unknown(m, "simulate", {"intervals", "dispersion_window", "exp_law_n", "exp_law_target"});
      auto& ss = c.simulate;
      if (m.contains("intervals")) ss.intervals = to_intervals(m["intervals"], "simulate.intervals");
      if (m.contains("dispersion_window")) ss.dispersion_window = to_interval(m["dispersion_window"], "simulate.dispersion_window");
      if (m.contains("exp_law_n")) ss.exp_law_n = to_counts(m["exp_law_n"], "simulate.exp_law_n");
      read_double(m, "exp_law_target", ss.exp_law_target, "simulate");
      for (std::size_t n : ss.exp_law_n)
        if (n == 0 || n > c.word.size()) fail("simulate.exp_law_n", "entries must lie in 1..|word|");
    }
    if (root.contains("verify")) {
      const Json& m = require_object(root["verify"], "verify");
      reject_unknown(m, "verify",
                     {"tiny_k", "tiny_interval", "symmetry_n", "invariant_n", "product_draws", "nonmixing_depth",
                      "nonmixing_points"});
      auto& vs = c.verify;
      read_count(m, "tiny_k", vs.tiny_k, "verify");
      if (m.contains("tiny_interval")) vs.tiny_interval = to_interval(m["tiny_interval"], "verify.tiny_interval");
      read_count(m, "symmetry_n", vs.symmetry_n, "verify");
      read_count(m, "invariant_n", vs.invariant_n, "verify");
      read_count(m, "product_draws", vs.product_draws, "verify");
      read_count(m, "nonmixing_depth", vs.nonmixing_depth, "verify");
      read_count(m, "nonmixing_points", vs.nonmixing_points, "verify");
      if (vs.tiny_k > kMaxDeltaHorizon) fail("verify.tiny_k", "must be <= 12");
    }
    if (root.contains("profile")) c.profile = parse_profile(to_string(root["profile"], "profile"));
    if (root.contains("tamper")) {
      const Json& t = require_object(root["tamper"], "tamper");
      reject_unknown(t, "tamper", {"cylinder_scale"});
      read_double(t, "cylinder_scale", c.tamper_cylinder_scale, "tamper");
    }
    // Validate every interval union now so that describe fails on bad R as well.
    IntervalUnion check_r(c.intervals);
    IntervalUnion check_sim(c.simulate.intervals);
    IntervalUnion check_window({c.simulate.dispersion_window});
    IntervalUnion check_tiny({c.verify.tiny_interval});
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  apply_profile(c, c.profile);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_profile(RunConfig& c, Profile profile) {
  c.profile = profile;
  if (profile == Profile::kFull) return;
  c.samples = std::min<std::size_t>(c.samples, 2000);
  if (c.simulate.exp_law_n.size() > 2) c.simulate.exp_law_n.resize(2);
  c.verify.product_draws = std::min<std::size_t>(c.verify.product_draws, 1000);
  c.verify.symmetry_n = std::min<std::size_t>(c.verify.symmetry_n, 4);
  c.verify.invariant_n = std::min<std::size_t>(c.verify.invariant_n, 6);
  c.verify.nonmixing_points = std::min<std::size_t>(c.verify.nonmixing_points, 8);
  c.measure.epsilon_max = std::min(c.measure.epsilon_max, std::max<std::size_t>(c.measure.epsilon_min, 8));
  c.measure.distortion_max = std::min<std::size_t>(c.measure.distortion_max, 4);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace rsft::cli
