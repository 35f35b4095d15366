#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "snslab/config.hpp"
#include "snslab/ensemble.hpp"

namespace snslab {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// One output file held in memory until the run is committed to disk.
struct Artifact {
  std::string name;
  std::string contents;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::Simulate;
  /// Statistical verdict of the experiment's checks.
  bool pass = true;
  std::vector<Artifact> artifacts;
  std::vector<TrajectoryFailure> failures;
  std::vector<std::string> summary;

  /// 0 on pass, 2 on statistical failure, 1 if trajectories failed.
  int exit_code() const;
  const Artifact* find(const std::string& name) const;
};

BasisPtr make_basis(const ExperimentConfig& config);
DynamicsSpec make_dynamics(const ExperimentConfig& config);
/// Deterministic initial state: a fixed Gaussian direction on the leading
/// run.initial_modes modes, scaled to H norm run.initial_amplitude.
FourierState initial_state(const ExperimentConfig& config, const BasisPtr& basis);

/// Hash of the resolved config without run.out and run.workers, which do not
/// influence any numeric output.
std::string config_hash(const ExperimentConfig& config);

/// Runs the experiment of config.run.kind and keeps every output in memory.
ExperimentResult compute_experiment(const ExperimentConfig& config);

struct RunOutcome {
  int exit_code = 1;
  std::filesystem::path out_dir;
  std::string error;
  ExperimentResult result;
};

/// compute_experiment, then writes the resolved config, the artifacts and
/// manifest.json into config.run.out. Execution errors are reported through
/// the exit code and the manifest, not thrown.
RunOutcome run_experiment(const ExperimentConfig& config);

}  // namespace snslab
