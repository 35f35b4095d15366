#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snslab/girsanov.hpp"
#include "snslab/noise.hpp"
#include "snslab/rng.hpp"
#include "snslab/spectral.hpp"

namespace snslab {

enum class Variant {
  Galerkin,      // du + (nu A u + B^N(u)) dt = pi_N C^{1/2} dW
  Truncated,     // B replaced by chi_R(|Au|^2) B
  Split,         // F-component of B switched off on (T - eps, T]
  DriftRemoved,  // v^N: B - pi_F B on the whole interval
};

enum class SplitMode {
  Plain,
  // adds pi_F B(e^{-nu A (t - T + eps)} u(T - eps)) on (T - eps, T]
  StationaryCompensated,
};

std::string to_string(Variant v);
std::string to_string(SplitMode m);

struct DynamicsSpec {
  CovarianceSpec covariance;
  double viscosity = 1.0;
  Variant variant = Variant::Galerkin;
  double R = 0.0;
  std::vector<std::size_t> F;
  double epsilon = 0.0;
  SplitMode split_mode = SplitMode::Plain;
  bool nonlinear = true;
  CutoffProfile chi{};

  explicit DynamicsSpec(CovarianceSpec cov, double nu = 1.0)
      : covariance(std::move(cov)), viscosity(nu) {}

  const BasisPtr& basis() const { return covariance.basis(); }

  /// Throws InvalidArgument naming the offending field.
  void validate(double horizon) const;
};

/// Per-mode factors of one exponential-Euler step of length dt:
/// decay = e^{-nu lambda dt}, gain = sqrt((1 - e^{-2 nu lambda dt}) / (2 nu lambda dt)).
/// Noise enters as gain * sigma * dW, which has the exact stochastic-convolution
/// variance; the drift enters as -gain * dt * drift so the Girsanov shift of dW
/// cancels it exactly on F.
struct StepFactors {
  std::vector<double> decay;
  std::vector<double> gain;
  double dt = 0.0;

  StepFactors(const DynamicsSpec& spec, double dt);
};

/// State frozen at the splitting time; used by the compensated split drift.
struct SplitAnchor {
  double time = 0.0;
  FourierState state;
};

struct StepContext {
  bool split_active = false;
  const SplitAnchor* anchor = nullptr;
  /// If set, receives B(state) (untruncated) when the drift evaluates it.
  FourierState* bilinear_out = nullptr;
};

/// Drift N(u) of du + (nu A u + N(u)) dt = C^{1/2} dW for the variant.
FourierState drift(const FourierState& state, const DynamicsSpec& spec, double t,
                   const StepContext& ctx = {});

/// One exponential-Euler step; `white_increment` has variance dt per mode
/// (the pre-coloring Gaussian).
FourierState step(const FourierState& state, const DynamicsSpec& spec, double t, double dt,
                  std::span<const double> white_increment, const StepContext& ctx = {});
FourierState step(const FourierState& state, const DynamicsSpec& spec, const StepFactors& f,
                  double t, std::span<const double> white_increment, const StepContext& ctx = {});

/// Source of white increments dW_n ~ N(0, dt I), indexed by step.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual void increment(std::uint64_t step, std::span<double> out) const = 0;
};

/// Counter-based noise: step n of trajectory (seed, index) is a pure function
/// of (seed, index, purpose, n).
class CounterNoise : public NoiseSource {
 public:
  CounterNoise(std::uint64_t master_seed, std::uint64_t trajectory, double dt,
               StreamPurpose purpose = StreamPurpose::Dynamics);
  void increment(std::uint64_t step, std::span<double> out) const override;

 private:
  RngStream stream_;
  double sqrt_dt_;
};

/// Base noise plus delta on one (step, mode) entry: a Cameron-Martin bump of
/// height delta/dt on [t_step, t_step + dt] in direction q_mode.
class BumpedNoise : public NoiseSource {
 public:
  BumpedNoise(const NoiseSource& base, std::uint64_t step, std::size_t mode, double delta)
      : base_(base), step_(step), mode_(mode), delta_(delta) {}
  void increment(std::uint64_t step, std::span<double> out) const override;

 private:
  const NoiseSource& base_;
  std::uint64_t step_;
  std::size_t mode_;
  double delta_;
};

struct TrajectoryOptions {
  /// Requested snapshot times in [0, horizon]; rounded to the grid. Time 0 and the
  /// horizon are always recorded.
  std::vector<double> snapshot_times;
  bool record_every_step = false;
  bool track_girsanov = false;
  bool track_dissipation = false;
  /// Threshold for tau_R; defaults to spec.R for the truncated variant.
  std::optional<double> tau_threshold;
  /// Keep the white increments of every step (for Malliavin checks).
  bool keep_increments = false;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::size_t> steps;
  std::vector<FourierState> states;
  /// Accumulator value at each snapshot (if tracked).
  std::vector<GirsanovAccumulator> girsanov;
  /// int_0^t |A^{1/2} u|^2 ds at each snapshot (if tracked).
  std::vector<double> dissipation;
  std::vector<std::vector<double>> increments;
  double tau_R = std::numeric_limits<double>::infinity();
  std::size_t tau_step = std::numeric_limits<std::size_t>::max();
  double sup_energy = 0.0;
  double dt = 0.0;
  std::size_t split_step = 0;
  double epsilon_rounded = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t trajectory = 0;

  const FourierState& final_state() const { return states.back(); }
};

/// Number of steps of length dt covering `span`; throws if span / dt is not
/// an integer up to 1e-9 relative rounding.
std::size_t grid_steps(double span, double dt, const char* what);

TrajectoryRecord run_trajectory(const FourierState& x, const DynamicsSpec& spec, double horizon,
                                double dt, const TrajectoryOptions& options,
                                const NoiseSource& noise);

TrajectoryRecord run_trajectory(const FourierState& x, const DynamicsSpec& spec, double horizon,
                                double dt, const TrajectoryOptions& options,
                                std::uint64_t master_seed, std::uint64_t trajectory);

}  // namespace snslab
