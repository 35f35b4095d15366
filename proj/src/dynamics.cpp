#include "snslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace snslab {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Galerkin: return "galerkin";
    case Variant::Truncated: return "truncated";
    case Variant::Split: return "split";
    case Variant::DriftRemoved: return "drift_removed";
  }
  return "?";
}

std::string to_string(SplitMode m) {
  return m == SplitMode::Plain ? "plain" : "stationary_compensated";
}

void DynamicsSpec::validate(double horizon) const {
  if (!(viscosity > 0.0)) throw InvalidArgument("viscosity must be positive");
  const std::size_t n = basis()->size();
  std::set<std::size_t> seen;
  for (std::size_t k : F) {
    if (k >= n) {
      throw InvalidArgument("projection mode " + std::to_string(k) + " outside basis of " +
                            std::to_string(n) + " modes");
    }
    if (!seen.insert(k).second) {
      throw InvalidArgument("projection mode " + std::to_string(k) + " listed twice");
    }
  }
  switch (variant) {
    case Variant::Galerkin: break;
    case Variant::Truncated:
      if (!(R > 0.0)) throw InvalidArgument("truncated variant needs R > 0");
      break;
    case Variant::Split:
      if (F.empty()) throw InvalidArgument("split variant needs a nonempty projection F");
      if (!(epsilon > 0.0 && epsilon < horizon)) {
        throw InvalidArgument("split epsilon must lie in (0, horizon)");
      }
      break;
    case Variant::DriftRemoved:
      if (F.empty()) throw InvalidArgument("drift-removed variant needs a nonempty projection F");
      break;
  }
}

StepFactors::StepFactors(const DynamicsSpec& spec, double dt_) : dt(dt_) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  for (double lambda : spec.basis()->eigenvalues()) {
    const double x = spec.viscosity * lambda * dt;
    decay.push_back(std::exp(-x));
    gain.push_back(std::sqrt(-std::expm1(-2.0 * x) / (2.0 * x)));
  }
}

FourierState drift(const FourierState& state, const DynamicsSpec& spec, double t,
                   const StepContext& ctx) {
  if (!spec.nonlinear) {
    if (ctx.bilinear_out) *ctx.bilinear_out = FourierState(state.basis());
    return FourierState(state.basis());
  }
  switch (spec.variant) {
    case Variant::Galerkin: {
      FourierState b = bilinear(state, state);
      if (ctx.bilinear_out) *ctx.bilinear_out = b;
      return b;
    }
    case Variant::Truncated: {
      const double au = sobolev_norm(state, 1.0);
      const double c = spec.chi.value(au * au / spec.R);
      if (c == 0.0 && !ctx.bilinear_out) return FourierState(state.basis());
      FourierState b = bilinear(state, state);
      if (ctx.bilinear_out) *ctx.bilinear_out = b;
      if (c == 0.0) return FourierState(state.basis());
      if (c != 1.0) b *= c;
      return b;
    }
    case Variant::DriftRemoved: {
      FourierState b = bilinear(state, state);
      if (ctx.bilinear_out) *ctx.bilinear_out = b;
      for (std::size_t k : spec.F) b[k] = 0.0;
      return b;
    }
    case Variant::Split: {
      FourierState b = bilinear(state, state);
      if (ctx.bilinear_out) *ctx.bilinear_out = b;
      if (!ctx.split_active) return b;
      for (std::size_t k : spec.F) b[k] = 0.0;
      if (spec.split_mode == SplitMode::StationaryCompensated) {
        if (!ctx.anchor) throw InvalidArgument("compensated split drift needs the frozen state");
        const FourierState frozen =
            semigroup_apply(ctx.anchor->state, t - ctx.anchor->time, spec.viscosity);
        const FourierState bf = bilinear(frozen, frozen);
        for (std::size_t k : spec.F) b[k] = bf[k];
      }
      return b;
    }
  }
  return FourierState(state.basis());
}

FourierState step(const FourierState& state, const DynamicsSpec& spec, const StepFactors& f,
                  double t, std::span<const double> dW, const StepContext& ctx) {
  if (dW.size() != state.size()) throw InvalidArgument("increment size does not match basis");
  const FourierState d = drift(state, spec, t, ctx);
  FourierState out(state.basis());
  for (std::size_t k = 0; k < state.size(); ++k) {
    out[k] = f.decay[k] * state[k] +
             f.gain[k] * (spec.covariance.stddev(k) * dW[k] - f.dt * d[k]);
  }
  if (!out.all_finite()) throw IntegrationError("non-finite state in exponential Euler step", t);
  return out;
}

FourierState step(const FourierState& state, const DynamicsSpec& spec, double t, double dt,
                  std::span<const double> dW, const StepContext& ctx) {
  return step(state, spec, StepFactors(spec, dt), t, dW, ctx);
}

CounterNoise::CounterNoise(std::uint64_t master_seed, std::uint64_t trajectory, double dt,
                           StreamPurpose purpose)
    : stream_(master_seed, trajectory, purpose), sqrt_dt_(std::sqrt(dt)) {}

void CounterNoise::increment(std::uint64_t step, std::span<double> out) const {
  RngStream s = stream_;
  s.seek(step);
  for (double& x : out) x = sqrt_dt_ * s.normal();
}

void BumpedNoise::increment(std::uint64_t step, std::span<double> out) const {
  base_.increment(step, out);
  if (step == step_) out[mode_] += delta_;
}

std::size_t grid_steps(double span, double dt, const char* what) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(span >= 0.0)) throw InvalidArgument(std::string(what) + " must be nonnegative");
  const double ratio = span / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument(std::string(what) + " is not an integer multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

TrajectoryRecord run_trajectory(const FourierState& x, const DynamicsSpec& spec, double horizon,
                                double dt, const TrajectoryOptions& options,
                                const NoiseSource& noise) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  spec.validate(horizon);
  if (x.basis()->size() != spec.basis()->size()) throw BasisMismatch();
  const std::size_t n_steps = grid_steps(horizon, dt, "horizon");
  if (n_steps == 0) throw InvalidArgument("horizon shorter than one time step");

  std::set<std::size_t> snaps{0, n_steps};
  if (options.record_every_step) {
    for (std::size_t n = 1; n <= n_steps; ++n) snaps.insert(n);
  }
  for (double t : options.snapshot_times) {
    if (t < -1e-12 || t > horizon * (1.0 + 1e-12)) {
      throw InvalidArgument("snapshot time " + std::to_string(t) + " outside [0, horizon]");
    }
    snaps.insert(std::min(n_steps, static_cast<std::size_t>(std::llround(t / dt))));
  }

  TrajectoryRecord rec;
  rec.dt = dt;
  rec.split_step = n_steps;
  if (spec.variant == Variant::Split) {
    const auto eps_steps = static_cast<std::size_t>(std::llround(spec.epsilon / dt));
    if (eps_steps == 0 || eps_steps >= n_steps) {
      throw InvalidArgument("split epsilon rounds to " + std::to_string(eps_steps) +
                            " steps; needs 1.." + std::to_string(n_steps - 1));
    }
    rec.split_step = n_steps - eps_steps;
    rec.epsilon_rounded = double(eps_steps) * dt;
  }

  const bool track_girsanov = options.track_girsanov;
  if (track_girsanov) {
    if (spec.F.empty()) throw InvalidArgument("Girsanov tracking needs a nonempty projection F");
    for (std::size_t k : spec.F) {
      if (spec.covariance.variance(k) == 0.0) {
        throw InvalidArgument("Girsanov weight needs sigma_k > 0 on F; mode " +
                              std::to_string(k) + " has zero variance");
      }
    }
  }
  const double sign = spec.variant == Variant::DriftRemoved ? -1.0 : 1.0;
  std::optional<double> threshold = options.tau_threshold;
  if (!threshold && spec.variant == Variant::Truncated) threshold = spec.R;

  const StepFactors factors(spec, dt);
  FourierState state = x;
  std::vector<double> dW(state.size());
  GirsanovAccumulator acc;
  acc.F = spec.F;
  std::optional<SplitAnchor> anchor;
  FourierState b(state.basis());
  double diss = 0.0;
  double v_prev = 0.0;
  if (options.track_dissipation) {
    const double v = sobolev_norm(state, 0.5);
    v_prev = v * v;
  }

  for (std::size_t n = 0;; ++n) {
    const double t = double(n) * dt;
    double energy = 0.0;
    for (double c : state.coeffs()) energy += c * c;
    rec.sup_energy = std::max(rec.sup_energy, energy);
    if (threshold && rec.tau_step == std::numeric_limits<std::size_t>::max()) {
      const double au = sobolev_norm(state, 1.0);
      if (au * au >= *threshold) {
        rec.tau_step = n;
        rec.tau_R = t;
      }
    }
    if (snaps.count(n)) {
      rec.times.push_back(t);
      rec.steps.push_back(n);
      rec.states.push_back(state);
      if (track_girsanov) rec.girsanov.push_back(acc);
      if (options.track_dissipation) rec.dissipation.push_back(diss);
    }
    if (n == n_steps) break;

    if (spec.variant == Variant::Split && n == rec.split_step) anchor = SplitAnchor{t, state};
    StepContext ctx;
    ctx.split_active = spec.variant == Variant::Split && n >= rec.split_step;
    ctx.anchor = anchor ? &*anchor : nullptr;
    ctx.bilinear_out = track_girsanov ? &b : nullptr;
    noise.increment(n, dW);
    if (options.keep_increments) rec.increments.push_back(dW);
    FourierState next = step(state, spec, factors, t, dW, ctx);
    if (track_girsanov) accumulate_from_bilinear(acc, b, dW, dt, spec.covariance, sign);
    state = std::move(next);
    if (options.track_dissipation) {
      const double v = sobolev_norm(state, 0.5);
      diss += 0.5 * dt * (v_prev + v * v);
      v_prev = v * v;
    }
  }
  return rec;
}

TrajectoryRecord run_trajectory(const FourierState& x, const DynamicsSpec& spec, double horizon,
                                double dt, const TrajectoryOptions& options,
                                std::uint64_t master_seed, std::uint64_t trajectory) {
  const CounterNoise noise(master_seed, trajectory, dt);
  TrajectoryRecord rec = run_trajectory(x, spec, horizon, dt, options, noise);
  rec.master_seed = master_seed;
  rec.trajectory = trajectory;
  return rec;
}

}  // namespace snslab
