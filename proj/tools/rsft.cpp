#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rsft/cli.hpp"

namespace fs = std::filesystem;
using namespace rsft::cli;

int main(int argc, char** argv) {
  CLI::App app{"Quenched hitting-time statistics of random subshifts of finite type"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir, profile;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  for (const char* name : {"describe", "measure", "simulate", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "directory for report files");
    sub->add_option("--profile", profile, "smoke or full")->check(CLI::IsMember({"smoke", "full"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::optional<RunConfig> config;
  try {
    config.emplace(load_config(config_path));
    if (seed) config->seed = *seed;
    if (workers) config->workers = *workers;
    if (!profile.empty()) apply_profile(*config, parse_profile(profile));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  std::string error;
  CommandResult result = run_command(command, *config, error);
  if (!error.empty()) std::cerr << error << '\n';
  std::cout << result.stdout_text;
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    for (const auto& [name, content] : result.files) {
      std::ofstream file(fs::path(out_dir) / name, std::ios::binary);
      file << content;
      if (!file) {
        std::cerr << "cannot write " << (fs::path(out_dir) / name).string() << '\n';
        return kConfigError;
      }
    }
  }
  return result.exit_code;
}
