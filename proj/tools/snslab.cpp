#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "snslab/harness.hpp"

using namespace snslab;

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

int run(ExperimentKind kind, const RunArgs& args) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(args.config);
    cfg.run.kind = kind;
    if (args.seed) cfg.run.seed = *args.seed;
    if (args.out) cfg.run.out = *args.out;
    if (args.workers) cfg.run.workers = *args.workers;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "snslab: " << e.what() << "\n";
    return 1;
  }
  const auto outcome = run_experiment(cfg);
  for (const auto& line : outcome.result.summary) std::cout << line << "\n";
  if (!outcome.error.empty()) std::cerr << "snslab: " << outcome.error << "\n";
  const char* verdict = outcome.exit_code == 0   ? "PASS"
                        : outcome.exit_code == 2 ? "FAIL (statistical)"
                                                 : "ERROR";
  std::cout << to_string(kind) << ": " << verdict << " -> " << outcome.out_dir.string() << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snslab: stochastic Navier-Stokes density laboratory"};
  app.set_version_flag("--version", std::string(kArtifactVersion));
  app.require_subcommand(1);

  RunArgs args;
  std::optional<ExperimentKind> chosen;
  for (ExperimentKind kind : all_kinds()) {
    auto* sub = app.add_subcommand(to_string(kind), "run the " + to_string(kind) + " experiment");
    sub->add_option("--config", args.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "override run.seed");
    sub->add_option("--out", args.out, "override run.out");
    sub->add_option("--workers", args.workers, "override run.workers (default: SNSLAB_WORKERS or all cores)");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  int cutoff = 1;
  std::size_t modes = 0;
  auto* basis_cmd = app.add_subcommand("basis", "print the mode table of a spectral basis");
  basis_cmd->add_option("--cutoff", cutoff, "largest |k|^2")->check(CLI::PositiveNumber);
  basis_cmd->add_option("--modes", modes, "keep only the first N modes");

  auto* defaults_cmd = app.add_subcommand("defaults", "print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (chosen) return run(*chosen, args);
    if (basis_cmd->parsed()) {
      const auto basis = modes ? galerkin_basis(cutoff, modes) : build_basis(cutoff);
      std::cout << basis->describe();
      return 0;
    }
    if (defaults_cmd->parsed()) {
      std::cout << serialize_config(ExperimentConfig{});
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "snslab: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
