#include "snslab/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "snslab/stats.hpp"

namespace snslab {

unsigned default_workers() {
  if (const char* env = std::getenv("SNSLAB_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task) {
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

void EnsembleResult::require_ok() const {
  if (ok()) return;
  std::string msg = "ensemble failed on " + std::to_string(failures.size()) + " trajectories:";
  for (std::size_t i = 0; i < failures.size() && i < 20; ++i) {
    msg += " #" + std::to_string(failures[i].index) + " (" + failures[i].message + ")";
  }
  throw Error(msg);
}

namespace {

EnsembleResult run_indexed(std::size_t n_traj, std::uint64_t master_seed, unsigned workers,
                           const std::function<TrajectoryRecord(std::size_t)>& one) {
  if (n_traj == 0) throw InvalidArgument("ensemble needs n_traj >= 1");
  EnsembleResult result;
  result.master_seed = master_seed;
  result.records.resize(n_traj);
  std::vector<std::string> errors(n_traj);
  std::vector<char> failed(n_traj, 0);
  parallel_for(n_traj, workers, [&](std::size_t i) {
    try {
      result.records[i] = one(i);
    } catch (const std::exception& e) {
      failed[i] = 1;
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n_traj; ++i) {
    if (failed[i]) result.failures.push_back({i, errors[i]});
  }
  return result;
}

}  // namespace

EnsembleResult run_ensemble(const FourierState& x, const DynamicsSpec& spec, double horizon,
                            double dt, std::size_t n_traj, std::uint64_t master_seed,
                            const EnsembleOptions& options) {
  spec.validate(horizon);
  return run_indexed(n_traj, master_seed, options.workers, [&](std::size_t i) {
    return run_trajectory(x, spec, horizon, dt, options.trajectory, master_seed,
                          options.first_index + i);
  });
}

EnergyMoments energy_moments(const EnsembleResult& ensemble) {
  EnergyMoments m;
  std::vector<const TrajectoryRecord*> ok;
  for (const auto& r : ensemble.records) {
    if (!r.states.empty()) ok.push_back(&r);
  }
  if (ok.empty()) return m;
  m.times = ok.front()->times;
  std::vector<double> values(ok.size());
  for (std::size_t s = 0; s < m.times.size(); ++s) {
    for (std::size_t i = 0; i < ok.size(); ++i) {
      const double h = sobolev_norm(ok[i]->states[s], 0.0);
      values[i] = h * h;
    }
    const auto e = stats::mean_estimate(values);
    m.mean.push_back(e.mean);
    m.std_error.push_back(e.std_error);
  }
  for (std::size_t i = 0; i < ok.size(); ++i) values[i] = ok[i]->sup_energy;
  const auto e = stats::mean_estimate(values);
  m.mean_sup_energy = e.mean;
  m.sup_energy_std_error = e.std_error;
  return m;
}

std::vector<double> projected_samples(const EnsembleResult& ensemble,
                                      const std::vector<std::size_t>& F, std::size_t snapshot) {
  std::vector<double> out;
  out.reserve(ensemble.records.size() * F.size());
  for (const auto& r : ensemble.records) {
    if (r.states.empty()) continue;
    const FourierState& s = r.states.at(std::min(snapshot, r.states.size() - 1));
    for (std::size_t k : F) out.push_back(s[k]);
  }
  return out;
}

FourierState stationary_start(const DynamicsSpec& spec, double burn_in, double dt,
                              std::uint64_t master_seed, std::uint64_t index) {
  if (!(burn_in > 0.0)) throw InvalidArgument("burn-in must be positive");
  DynamicsSpec burn = spec;
  burn.variant = Variant::Galerkin;
  const CounterNoise noise(master_seed, index, dt, StreamPurpose::BurnIn);
  TrajectoryOptions opts;
  const TrajectoryRecord r =
      run_trajectory(FourierState(spec.basis()), burn, burn_in, dt, opts, noise);
  return r.final_state();
}

StationaryResult run_stationary_ensemble(const DynamicsSpec& spec, double burn_in, double horizon,
                                         double dt, std::size_t n_traj,
                                         std::uint64_t master_seed,
                                         const EnsembleOptions& options, double warning_z) {
  if (!(burn_in > 0.0)) throw InvalidArgument("burn-in must be positive");
  spec.validate(horizon);
  StationaryResult out;
  out.ensemble = run_indexed(n_traj, master_seed, options.workers, [&](std::size_t i) {
    const std::uint64_t index = options.first_index + i;
    const FourierState x0 = stationary_start(spec, burn_in, dt, master_seed, index);
    return run_trajectory(x0, spec, horizon, dt, options.trajectory, master_seed, index);
  });
  const EnergyMoments m = energy_moments(out.ensemble);
  if (!m.mean.empty()) {
    auto& d = out.diagnostic;
    d.start_mean = m.mean.front();
    d.start_std_error = m.std_error.front();
    d.end_mean = m.mean.back();
    d.end_std_error = m.std_error.back();
    const double se = std::hypot(d.start_std_error, d.end_std_error);
    d.z_score = se > 0.0 ? (d.end_mean - d.start_mean) / se : 0.0;
    d.warning = std::abs(d.z_score) > warning_z;
  }
  return out;
}

}  // namespace snslab
