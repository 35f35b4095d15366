#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "snslab/dynamics.hpp"

namespace snslab {

/// Worker count from SNSLAB_WORKERS, else hardware concurrency.
unsigned default_workers();

/// Runs task(i) for i in [0, n) on `workers` threads. Each index is executed
/// exactly once; callers write results into index-addressed slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task);

struct TrajectoryFailure {
  std::size_t index = 0;
  std::string message;
};

struct EnsembleResult {
  std::vector<TrajectoryRecord> records;  // by trajectory index; empty slot on failure
  std::vector<TrajectoryFailure> failures;
  std::uint64_t master_seed = 0;

  bool ok() const { return failures.empty(); }
  /// Throws an Error listing failed trajectory indices, if any.
  void require_ok() const;
};

struct EnsembleOptions {
  TrajectoryOptions trajectory;
  unsigned workers = 0;  // 0 = default_workers()
  std::uint64_t first_index = 0;
};

EnsembleResult run_ensemble(const FourierState& x, const DynamicsSpec& spec, double horizon,
                            double dt, std::size_t n_traj, std::uint64_t master_seed,
                            const EnsembleOptions& options = {});

/// Moments of |u|_H^2 per snapshot, reduced in trajectory order.
struct EnergyMoments {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;
  double mean_sup_energy = 0.0;
  double sup_energy_std_error = 0.0;
};

EnergyMoments energy_moments(const EnsembleResult& ensemble);

/// Endpoint (or snapshot `snapshot`) projections onto F, row-major n x |F|.
std::vector<double> projected_samples(const EnsembleResult& ensemble,
                                      const std::vector<std::size_t>& F, std::size_t snapshot);

struct StationarityDiagnostic {
  double start_mean = 0.0;
  double start_std_error = 0.0;
  double end_mean = 0.0;
  double end_std_error = 0.0;
  double z_score = 0.0;
  bool warning = false;
};

struct StationaryResult {
  EnsembleResult ensemble;
  StationarityDiagnostic diagnostic;
};

/// Each trajectory starts at 0, runs the Galerkin (or, with nonlinear off,
/// linear) dynamics for burn_in on its own burn-in stream, then runs `spec`
/// for `horizon` with the recording stream. Times in the records are
/// relative to the start of the recording window.
StationaryResult run_stationary_ensemble(const DynamicsSpec& spec, double burn_in, double horizon,
                                         double dt, std::size_t n_traj,
                                         std::uint64_t master_seed,
                                         const EnsembleOptions& options = {},
                                         double warning_z = 3.0);

/// Burned-in state of trajectory `index` (the stationary initial condition).
FourierState stationary_start(const DynamicsSpec& spec, double burn_in, double dt,
                              std::uint64_t master_seed, std::uint64_t index);

}  // namespace snslab
