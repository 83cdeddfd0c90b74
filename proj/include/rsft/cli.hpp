#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsft/process.hpp"
#include "rsft/scenario.hpp"
#include "rsft/stats.hpp"

namespace rsft::cli {

/// Raised for unreadable or invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNonConvergence = 3 };

enum class Profile { kSmoke, kFull };

struct GridSpec {
  std::size_t refine_depth = 4;
  std::size_t points_per_cell = 2;
};

struct MeasureSpec {
  std::size_t table_depth = 3;
  std::size_t epsilon_min = 2, epsilon_max = 10;
  std::size_t phi_n = 2, phi_m = 2, phi_gap_max = 8;
  std::size_t beta_min = 2, beta_max = 8;
  std::size_t distortion_max = 6;
  GridSpec grid;
};

struct SimulateSpec {
  std::vector<Interval> intervals{{0.0, 1.0}, {1.0, 2.0}};
  Interval dispersion_window{0.0, 2.0};
  std::vector<std::size_t> exp_law_n{3, 5, 7};
  double exp_law_target = 5.0;
};

struct VerifySpec {
  std::size_t tiny_k = 8;
  Interval tiny_interval{0.0, 0.5};
  std::size_t symmetry_n = 6;
  std::size_t invariant_n = 8;
  std::size_t product_draws = 10'000;
  std::size_t nonmixing_depth = 6;
  std::size_t nonmixing_points = 16;
};

struct RunConfig {
  explicit RunConfig(Scenario s) : scenario(std::move(s)), word(scenario.word) {}

  std::string scenario_ref;  // built-in name or "inline"
  Scenario scenario;
  double omega = 0.1;
  Word word;  // designated word y (prefixes of it are used)
  std::size_t n = 6;
  std::vector<Interval> intervals{{0.0, 1.0}};
  std::size_t samples = 20'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  EngineOptions engine;
  MeasureSpec measure;
  SimulateSpec simulate;
  VerifySpec verify;
  Profile profile = Profile::kFull;
  double tamper_cylinder_scale = 1.0;  // fault injection for the negative control
};

/// Parses a JSON document; errors carry line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Scales the Monte-Carlo and enumeration sizes down for a smoke run.
void apply_profile(RunConfig& config, Profile profile);
Profile parse_profile(const std::string& name);

struct CommandResult {
  int exit_code = kPass;
  std::string stdout_text;
  std::map<std::string, std::string> files;  // file name -> content, written under --out
};

CommandResult cmd_describe(const RunConfig& config);
CommandResult cmd_measure(const RunConfig& config);
CommandResult cmd_simulate(const RunConfig& config);
CommandResult cmd_verify(const RunConfig& config);

/// Runs `command` and maps library exceptions onto the exit-code contract; messages go to `error`.
CommandResult run_command(const std::string& command, const RunConfig& config, std::string& error);

/// All checks for one configuration.
VerificationReport build_report(const RunConfig& config);

/// Shortest round-trip decimal with '.' separator, independent of the locale.
std::string format_number(double value);

}  // namespace rsft::cli
