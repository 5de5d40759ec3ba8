#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatsheet/errors.hpp"
#include "heatsheet/runner.hpp"
#include "heatsheet/version.hpp"

namespace {

int run_cli(int argc, char** argv) {
  CLI::App app{"heatsheet: simulation and verification lab for systems of stochastic "
               "heat equations with additive noise"};
  app.set_version_flag("--version", std::string(heatsheet::kArtifactVersion));

  std::string subcommand;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  std::vector<std::string> overrides;

  app.add_option("subcommand", subcommand,
                 "simulate | hit | capacity | invariant | recurrence | verify")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "override master seed");
  app.add_option("--workers", workers, "override worker count");
  app.add_option("--out", out_dir, "override output directory");
  app.add_option("overrides", overrides, "key.path=value config overrides");

  CLI11_PARSE(app, argc, argv);

  nlohmann::json config = nlohmann::json::object();
  if (!config_path.empty()) config = heatsheet::load_config_file(config_path);
  heatsheet::apply_overrides(config, overrides);
  if (app.count("--seed") > 0) config["seed"] = seed;
  if (app.count("--workers") > 0) config["workers"] = workers;
  if (app.count("--out") > 0) config["output"]["dir"] = out_dir;

  const heatsheet::RunConfig rc = heatsheet::parse_run_config(subcommand, config);
  const heatsheet::RunOutcome outcome = heatsheet::run(rc);

  if (subcommand == "verify") {
    for (const auto& check : outcome.envelope["payload"]["checks"]) {
      std::printf("[%s] %-36s residual=%.3e tolerance=%.3e\n",
                  check["pass"].get<bool>() ? "PASS" : "FAIL",
                  check["name"].get<std::string>().c_str(), check["residual"].get<double>(),
                  check["tolerance"].get<double>());
    }
  }
  std::printf("wrote %s\n", outcome.envelope_path.c_str());
  if (!outcome.ok) {
    std::fprintf(stderr, "error[precision]: verification checks failed\n");
    return heatsheet::kExitPrecision;
  }
  return heatsheet::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const heatsheet::ConfigError& e) {
    std::fprintf(stderr, "error[config]: %s\n", e.what());
    return heatsheet::kExitConfig;
  } catch (const heatsheet::DomainError& e) {
    std::fprintf(stderr, "error[config]: %s\n", e.what());
    return heatsheet::kExitConfig;
  } catch (const heatsheet::PrecisionError& e) {
    std::fprintf(stderr, "error[precision]: %s\n", e.what());
    return heatsheet::kExitPrecision;
  } catch (const heatsheet::ConvergenceError& e) {
    std::fprintf(stderr, "error[convergence]: %s\n", e.what());
    return heatsheet::kExitConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[runtime]: %s\n", e.what());
    return heatsheet::kExitRuntime;
  }
}
