#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "ltr/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"LQG/LTR line-of-sight stabilization pipeline"};
  app.set_version_flag("--version", cli::kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rho;
  std::optional<std::string> grid;
  std::optional<int> workers;
  app.add_option("--config", config_path, "JSON config file (defaults when omitted)")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "base seed for simulation, perturbation and identification");
  app.add_option("--rho", rho, "comma-separated rho sweep, descending");
  app.add_option("--grid", grid, "frequency grid lo:hi:points_per_decade in Hz");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  const char* help[] = {"plant, weights and delay comparison",
                        "EKF inertia and friction estimation",
                        "LQG/LTR rho sweep and selected compensator",
                        "robustness tests of the stored compensator",
                        "balanced truncation of the stored compensator",
                        "Tustin discretization of the reduced compensator",
                        "closed-loop disturbance simulation",
                        "swept-sine identification and perturbed models",
                        "every stage in order plus summary.json"};
  for (std::size_t i = 0; i < cli::command_names().size(); ++i) {
    app.add_subcommand(cli::command_names()[i], help[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    cli::ProjectConfig config = config_path.empty() ? cli::ProjectConfig{} : cli::load_config(config_path);
    if (out) config.output_dir = *out;
    if (seed) cli::apply_seed(config, *seed);
    if (rho) {
      config.rhos = cli::parse_rho_list(*rho);
      bool listed = false;
      for (double r : config.rhos) listed = listed || std::abs(r - config.selected_rho) <= 1e-12 * r;
      if (!listed) config.selected_rho = config.rhos.back();
    }
    if (grid) config.grid = cli::parse_grid(*grid);
    if (workers) config.workers = static_cast<std::size_t>(*workers);
    config.validate();
    cli::run_command(command, config);
  } catch (const cli::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ltr::Error& e) {
    std::fprintf(stderr, "computation error: %s\n", e.what());
    return 3;
  } catch (const cli::MissingDependency& e) {
    std::fprintf(stderr, "missing dependency: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
