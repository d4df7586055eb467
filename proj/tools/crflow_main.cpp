// crflow — scenario-driven runner for the conformal Ricci flow laboratory.
//
//   crflow run <config> [--out DIR] [--sweep]   run one scenario (or, with
//                                               --sweep, a JSON array of
//                                               scenarios concurrently)
//   crflow scenarios                            list built-in scenarios
//   crflow schema                               print the config schema
//
// <config> is a path to a JSON scenario document, or the name of a built-in
// scenario. Artifacts land in <root>/<scenario name>/ where <root> is --out,
// else $CRFLOW_OUT, else ./crflow_out.
//
// Exit codes: 0 success, 2 configuration error, 3 pressure-solve failure,
// 4 numerical breakdown.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crflow/errors.hpp"
#include "crflow/scenario.hpp"
#include "json.hpp"

namespace {

std::string load_config_text(const std::string& arg) {
  if (std::filesystem::exists(arg)) {
    std::ifstream in(arg, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in)
      throw crflow::ConfigError("could not read config file '" + arg + "'");
    return buf.str();
  }
  return crflow::builtin_scenario(arg);  // throws ConfigError if unknown
}

std::string output_root(const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  if (const char* env = std::getenv("CRFLOW_OUT"); env && *env) return env;
  return "crflow_out";
}

int exit_code_of(const std::exception& e) {
  if (dynamic_cast<const crflow::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const crflow::NonInvertibleOperator*>(&e)) return 3;
  return 4;
}

int run_command(const std::string& config_arg, const std::string& out_flag,
                bool sweep) {
  const std::string text = load_config_text(config_arg);
  const std::string root = output_root(out_flag);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw crflow::ConfigError(std::string("config: not valid JSON: ") +
                              e.what());
  }

  if (!doc.is_array()) {
    const crflow::Scenario s = crflow::parse_config(text);
    const crflow::RunArtifacts art = crflow::run_scenario(s, root);
    std::cout << s.name << ": exit " << art.exit_code << ", artifacts in "
              << art.out_dir << "\n";
    return art.exit_code;
  }

  if (!sweep)
    throw crflow::ConfigError(
        "config: a JSON array of scenarios requires --sweep");

  // Validate everything up front: a mistyped entry must not start any run.
  std::vector<crflow::Scenario> scenarios;
  std::vector<std::string> names;
  for (const nlohmann::json& entry : doc) {
    scenarios.push_back(crflow::parse_config(entry.dump()));
    const std::string& name = scenarios.back().name;
    for (const std::string& seen : names)
      if (seen == name)
        throw crflow::ConfigError(
            "config: duplicate scenario name '" + name +
            "' in sweep (output directories must be disjoint)");
    names.push_back(name);
  }

  std::vector<std::future<crflow::RunArtifacts>> futures;
  futures.reserve(scenarios.size());
  for (const crflow::Scenario& s : scenarios)
    futures.push_back(std::async(std::launch::async, [&s, &root] {
      return crflow::run_scenario(s, root);
    }));

  int worst = 0;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      const crflow::RunArtifacts art = futures[i].get();
      std::cout << scenarios[i].name << ": exit " << art.exit_code
                << ", artifacts in " << art.out_dir << "\n";
      worst = std::max(worst, art.exit_code);
    } catch (const std::exception& e) {
      std::cerr << scenarios[i].name << ": " << e.what() << "\n";
      worst = std::max(worst, exit_code_of(e));
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal Ricci flow laboratory"};
  app.require_subcommand(1);

  std::string config_arg, out_flag;
  bool sweep = false;

  CLI::App* run = app.add_subcommand(
      "run", "run a scenario (config file path or built-in name)");
  run->add_option("config", config_arg,
                  "scenario document path, or built-in scenario name")
      ->required();
  run->add_option("--out", out_flag,
                  "output root directory (else $CRFLOW_OUT, else ./crflow_out)");
  run->add_flag("--sweep", sweep,
                "config is a JSON array of scenarios; run them concurrently");

  CLI::App* scenarios =
      app.add_subcommand("scenarios", "list built-in scenarios");
  CLI::App* schema =
      app.add_subcommand("schema", "print the scenario config schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (scenarios->parsed()) {
      for (const std::string& name : crflow::list_scenarios())
        std::cout << name << "\n";
      return 0;
    }
    if (schema->parsed()) {
      std::cout << crflow::emit_schema();
      return 0;
    }
    return run_command(config_arg, out_flag, sweep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_of(e);
  }
}
