#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "rsft/cli.hpp"

using namespace rsft;
using namespace rsft::cli;
namespace fs = std::filesystem;

namespace {

RunConfig smoke(const std::string& text) {
  RunConfig c = parse_config(text);
  apply_profile(c, Profile::kSmoke);
  return c;
}

fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / ("rsft_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  std::string cmd = std::string(RSFT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  RunConfig c = parse_config(R"({"scenario": "example5", "seed": 3, "n": 4, "intervals": [[0, 1], [2, 3]]})");
  CHECK(c.scenario.name == "example5");
  CHECK(c.n == 4);
  CHECK(c.intervals.size() == 2);
  CHECK(c.word == c.scenario.word);

  CHECK_THROWS_AS(parse_config(R"({"scenario": "example5"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "example5", "seed": 1, "bogus": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "nowhere", "seed": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "example5", "seed": 1, "omega": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "example5", "seed": 1, "word": "14"})"), ConfigError);
  try {
    parse_config("{\"scenario\": \"example5\",\n \"seed\": }");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    parse_config(R"({"scenario": "example5", "seed": 1, "intervals": [[0, 1], [0.5, 2]]})");
    FAIL("expected overlapping intervals to be rejected");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("overlap") != std::string::npos);
  }
}

TEST_CASE("inline scenario") {
  RunConfig c = parse_config(R"({
    "scenario": {"name": "two", "angle": 0.41421356237309515, "partition": [0, 0.5],
                 "matrices": [["11", "11"], ["11", "10"]], "potential": "zero", "word": "21111111"},
    "seed": 1, "n": 4})");
  CHECK(c.scenario.sft.alphabet_size() == 2);
  CHECK(c.scenario.sft.partition().size() == 2);
  CHECK(format_word(c.word) == "21111111");
}

TEST_CASE("number formatting is locale independent and round-trips") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("describe prints the example matrices") {
  std::string error;
  CommandResult r = run_command("describe", smoke(R"({"scenario": "example5", "seed": 1})"), error);
  CHECK(r.exit_code == kPass);
  auto j = nlohmann::json::parse(r.stdout_text);
  CHECK(j["cells"][0]["matrix"] == nlohmann::json::array({"111", "111", "111"}));
  CHECK(j["cells"][1]["matrix"] == nlohmann::json::array({"110", "110", "001"}));
  CHECK(j["cells"][3]["matrix"] == nlohmann::json::array({"100", "011", "011"}));
  CHECK(j["aperiodicity_constant"] == 3);
  CHECK(j["symmetric"] == true);
  CommandResult b = run_command("describe", smoke(R"({"scenario": "bernoulli", "seed": 1})"), error);
  CHECK(nlohmann::json::parse(b.stdout_text)["aperiodicity_constant"] == 1);
}

TEST_CASE("measure on Bernoulli lists 3^-n") {
  std::string error;
  CommandResult r = run_command("measure", smoke(R"({"scenario": "bernoulli", "seed": 1})"), error);
  REQUIRE(r.exit_code == kPass);
  std::istringstream in(r.stdout_text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "series,key,value");
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.rfind("epsilon,", 0) != 0) continue;
    auto a = line.find(',', 8);
    int n = std::stoi(line.substr(8, a - 8));
    CHECK(std::stod(line.substr(a + 1)) == doctest::Approx(std::pow(3.0, -n)).epsilon(1e-12));
    ++seen;
  }
  CHECK(seen > 3);
  CHECK(run_command("measure", smoke(R"({"scenario": "bernoulli", "seed": 1})"), error).stdout_text == r.stdout_text);
}

TEST_CASE("simulate and verify are deterministic across worker counts") {
  std::string error;
  RunConfig c = smoke(R"({"scenario": "example5", "seed": 42})");
  CommandResult s1 = run_command("simulate", c, error);
  c.workers = 3;
  CommandResult s3 = run_command("simulate", c, error);
  CHECK(s1.files == s3.files);
  auto j = nlohmann::json::parse(s1.stdout_text);
  CHECK(j.contains("zero_probability"));
  CHECK(s1.files.count("realizations.csv") == 1);
  CHECK(s1.files.at("realizations.csv").rfind("sample,count_0,count_1,window_count,first_hit\n", 0) == 0);

  c.seed = 43;
  CommandResult other = run_command("simulate", c, error);
  CHECK(other.files.at("realizations.csv") != s1.files.at("realizations.csv"));
}

TEST_CASE("verify on the oracle scenario passes every exact check") {
  std::string error;
  CommandResult r = run_command("verify", smoke(R"({"scenario": "bernoulli", "seed": 5})"), error);
  auto j = nlohmann::json::parse(r.stdout_text);
  for (const auto& e : j["entries"]) {
    std::string kind = e["target_kind"];
    if (kind == "exact" || kind == "oracle" || kind == "bound") CHECK_MESSAGE(e["passed"] == true, e["name"]);
  }
}

TEST_CASE("tampered measures fail verification") {
  std::string error;
  RunConfig c = smoke(R"({"scenario": "bernoulli", "seed": 5, "tamper": {"cylinder_scale": 1.001}})");
  CommandResult r = run_command("verify", c, error);
  CHECK(r.exit_code == kCheckFailure);
}

TEST_CASE("non-convergence maps to exit code 3") {
  std::string error;
  RunConfig c = smoke(R"({"scenario": "example5-tilted", "seed": 1,
                          "engine": {"tol": 1e-15, "initial_burn_in": 2, "max_burn_in": 4}})");
  CHECK(run_command("simulate", c, error).exit_code == kNonConvergence);
  CHECK(error.find("non-convergence") != std::string::npos);
}

TEST_CASE("binary exit codes and output files") {
  fs::path dir = scratch();
  std::string good = write(dir / "good.json", R"({"scenario": "bernoulli", "seed": 9})");
  std::string bad = write(dir / "bad.json", R"({"scenario": "example5", "seed": 1, "intervals": [[0, 1], [0.5, 2]]})");
  std::string tampered =
      write(dir / "tamper.json", R"({"scenario": "bernoulli", "seed": 9, "tamper": {"cylinder_scale": 1.01}})");
  CHECK(run("describe --config " + good) == 0);
  CHECK(run("describe --config " + bad) == 2);
  CHECK(run("describe --config " + (dir / "missing.json").string()) == 2);
  CHECK(run("describe") == 2);
  CHECK(run("verify --config " + tampered + " --profile smoke") == 1);

  std::string out1 = (dir / "w1").string(), out4 = (dir / "w4").string();
  CHECK(run("simulate --config " + good + " --profile smoke --workers 1 --out " + out1) == 0);
  CHECK(run("simulate --config " + good + " --profile smoke --workers 4 --out " + out4) == 0);
  CHECK(slurp(fs::path(out1) / "simulate.json") == slurp(fs::path(out4) / "simulate.json"));
  CHECK(slurp(fs::path(out1) / "realizations.csv") == slurp(fs::path(out4) / "realizations.csv"));
  CHECK(run("simulate --config " + good + " --profile smoke --seed 10 --out " + out4) == 0);
  CHECK(slurp(fs::path(out1) / "realizations.csv") != slurp(fs::path(out4) / "realizations.csv"));
  fs::remove_all(dir);
}
