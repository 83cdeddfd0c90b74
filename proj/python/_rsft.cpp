#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rsft/cli.hpp"

namespace py = pybind11;
using namespace rsft;

namespace {

py::tuple run(const std::string& command, const std::string& config_text, std::optional<std::string> profile,
              std::optional<unsigned> workers, std::optional<std::uint64_t> seed) {
  std::optional<cli::RunConfig> config;
  try {
    config.emplace(cli::parse_config(config_text));
    if (seed) config->seed = *seed;
    if (workers) config->workers = *workers;
    if (profile) cli::apply_profile(*config, cli::parse_profile(*profile));
  } catch (const cli::ConfigError& e) {
    return py::make_tuple(int(cli::kConfigError), std::string(), py::dict(), std::string(e.what()));
  }
  std::string error;
  cli::CommandResult result;
  {
    py::gil_scoped_release release;
    result = cli::run_command(command, *config, error);
  }
  py::dict files;
  for (const auto& [name, content] : result.files) files[py::str(name)] = py::bytes(content);
  return py::make_tuple(result.exit_code, result.stdout_text, files, error);
}

}  // namespace

PYBIND11_MODULE(_rsft, m) {
  m.doc() = "Hitting-time statistics of random subshifts of finite type";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);
  py::register_exception<HorizonError>(m, "HorizonError", PyExc_RuntimeError);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("notes", &Scenario::notes)
      .def_property_readonly("alphabet_size", [](const Scenario& s) { return s.sft.alphabet_size(); })
      .def_property_readonly("angle", [](const Scenario& s) { return s.sft.base().angle(); })
      .def_property_readonly("word", [](const Scenario& s) { return format_word(s.word); })
      .def_property_readonly("has_oracle", [](const Scenario& s) { return s.oracle.has_value(); })
      .def("oracle_probability",
           [](const Scenario& s, const std::string& word) {
             if (!s.oracle) throw DomainError("scenario has no closed-form oracle");
             return s.oracle->probability(parse_word(word));
           })
      .def("__repr__", [](const Scenario& s) { return "<Scenario " + s.name + ">"; });

  m.def("builtin_scenario", &builtin_scenario, py::arg("name"));
  m.def("example5", &build_example5, py::arg("angle") = kDefaultAngle, py::arg("psi") = "zero");

  m.def(
      "cylinder_measure",
      [](const Scenario& s, double omega, const std::string& word) {
        return cylinder_measure(s.sft, s.potential, omega, parse_word(word)).probability;
      },
      py::arg("scenario"), py::arg("omega"), py::arg("word"));
  m.def(
      "measure_table",
      [](const Scenario& s, double omega, std::size_t n) {
        std::map<std::string, double> out;
        for (const auto& [w, p] : measure_table(s.sft, s.potential, omega, n).probs) out[format_word(w)] = p;
        return out;
      },
      py::arg("scenario"), py::arg("omega"), py::arg("n"));
  m.def(
      "admissible",
      [](const Scenario& s, double omega, const std::string& word) {
        return is_admissible(s.sft, omega, parse_word(word));
      },
      py::arg("scenario"), py::arg("omega"), py::arg("word"));
  m.def(
      "designated_word", [](std::size_t b, std::size_t length) { return format_word(designated_word(b, length)); },
      py::arg("alphabet_size"), py::arg("length"));
  m.def(
      "min_return", [](const std::string& word) { return min_return_q(parse_word(word)); }, py::arg("word"));
  m.def(
      "half_turn_sequence",
      [](double angle, std::size_t count) { return half_turn_sequence(BaseRotation(angle), count); },
      py::arg("angle"), py::arg("count"));
  m.def(
      "exact_survival",
      [](const Scenario& s, double omega, const std::string& word, std::size_t k_max) {
        CylinderSet a = CylinderSet::single(parse_word(word));
        FiberChain chain = converged_chain(s.sft, s.potential, omega, k_max + a.depth() + 1);
        return exact_survival(chain, a, k_max);
      },
      py::arg("scenario"), py::arg("omega"), py::arg("word"), py::arg("k_max"));

  m.def("run", &run, py::arg("command"), py::arg("config"), py::arg("profile") = py::none(),
        py::arg("workers") = py::none(), py::arg("seed") = py::none(),
        "Runs describe/measure/simulate/verify on a JSON config; returns (exit_code, stdout, files, error).");
}
