#include "snslab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <json.hpp>

#include "snslab/density.hpp"
#include "snslab/girsanov.hpp"
#include "snslab/io.hpp"
#include "snslab/malliavin.hpp"
#include "snslab/stats.hpp"

namespace snslab {

namespace {

using io::csv_number;

std::string flag(bool b) { return b ? "true" : "false"; }

std::vector<double> default_times(const ExperimentConfig& c, std::vector<double> fractions) {
  if (!c.run.snapshots.empty()) return c.run.snapshots;
  for (double& f : fractions) f *= c.run.horizon;
  return fractions;
}

EnsembleOptions ensemble_options(const ExperimentConfig& c) {
  EnsembleOptions o;
  o.workers = c.run.workers;
  o.trajectory.snapshot_times = c.run.snapshots;
  return o;
}

/// Ensemble from the configured initial state, or from burned-in states when
/// dynamics.stationary is set.
EnsembleResult simulate(const ExperimentConfig& c, const DynamicsSpec& spec, const FourierState& x,
                        const EnsembleOptions& o, std::optional<StationarityDiagnostic>* diag) {
  if (c.dynamics.stationary) {
    auto r = run_stationary_ensemble(spec, c.run.burn_in, c.run.horizon, c.run.dt, c.run.n_traj,
                                     c.run.seed, o, c.stats.stationarity_z);
    if (diag) *diag = r.diagnostic;
    return std::move(r.ensemble);
  }
  return run_ensemble(x, spec, c.run.horizon, c.run.dt, c.run.n_traj, c.run.seed, o);
}

void add_failures(ExperimentResult& r, const EnsembleResult& e) {
  r.failures.insert(r.failures.end(), e.failures.begin(), e.failures.end());
}

std::vector<double> ou_draws(const OUReference& ref, std::uint64_t seed, std::size_t n,
                             unsigned workers) {
  const std::size_t d = ref.dim();
  std::vector<double> out(n * d);
  parallel_for(n, workers, [&](std::size_t i) {
    RngStream rng(seed, i, StreamPurpose::OuSample);
    const auto x = ou_exact_sample(ref, rng);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
  });
  return out;
}

/// Rows (i <= j) comparing centered second moments with diag(Q).
void covariance_rows(io::CsvTable& table, const std::string& source, std::span<const double> x,
                     const OUReference& ref, double z_tol, bool& pass) {
  const std::size_t d = ref.dim();
  const std::size_t n = x.size() / d;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      std::vector<double> p(n);
      for (std::size_t s = 0; s < n; ++s) {
        p[s] = (x[s * d + i] - ref.mean[i]) * (x[s * d + j] - ref.mean[j]);
      }
      const auto m = stats::mean_estimate(p);
      const double expected = i == j ? ref.Q[i] : 0.0;
      const double z = m.std_error > 0.0 ? (m.mean - expected) / m.std_error
                                         : (m.mean == expected ? 0.0 : INFINITY);
      const bool ok = std::abs(z) <= z_tol;
      pass = pass && ok;
      table.add_row({source, std::to_string(i), std::to_string(j), std::to_string(ref.F[i]),
                     std::to_string(ref.F[j]), csv_number(expected), csv_number(m.mean),
                     csv_number(m.std_error), csv_number(z), flag(ok)});
    }
  }
}

void run_simulate(const ExperimentConfig& c, ExperimentResult& r) {
  const auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  std::optional<StationarityDiagnostic> diag;
  const auto ens = simulate(c, spec, x, ensemble_options(c), &diag);
  add_failures(r, ens);

  const auto m = energy_moments(ens);
  io::CsvTable energy({"t", "mean_energy", "std_error"});
  for (std::size_t s = 0; s < m.times.size(); ++s) {
    energy.add_row({csv_number(m.times[s]), csv_number(m.mean[s]), csv_number(m.std_error[s])});
  }
  io::CsvTable traj({"trajectory", "status", "tau_R", "sup_energy", "final_energy"});
  std::string snapshots = io::encode_snapshot_header(*spec.basis());
  for (std::size_t i = 0; i < ens.records.size(); ++i) {
    const auto& rec = ens.records[i];
    if (rec.states.empty()) {
      traj.add_row({std::to_string(i), "failed", "nan", "nan", "nan"});
      continue;
    }
    const double e = std::pow(sobolev_norm(rec.final_state(), 0.0), 2);
    traj.add_row({std::to_string(i), "ok", csv_number(rec.tau_R), csv_number(rec.sup_energy),
                  csv_number(e)});
    for (std::size_t s = 0; s < rec.states.size(); ++s) {
      io::append_snapshot(snapshots, rec.times[s], i, rec.states[s]);
    }
  }
  r.artifacts.push_back({"energy.csv", energy.str()});
  r.artifacts.push_back({"trajectories.csv", traj.str()});
  if (c.run.write_snapshots) r.artifacts.push_back({"snapshots.bin", std::move(snapshots)});
  if (diag) {
    io::CsvTable st({"start_mean", "start_std_error", "end_mean", "end_std_error", "z_score",
                     "warning"});
    st.add_row({csv_number(diag->start_mean), csv_number(diag->start_std_error),
                csv_number(diag->end_mean), csv_number(diag->end_std_error),
                csv_number(diag->z_score), flag(diag->warning)});
    r.artifacts.push_back({"stationarity.csv", st.str()});
    if (diag->warning) r.summary.push_back("warning: stationarity diagnostic exceeded its threshold");
  }
  r.summary.push_back("simulated " + std::to_string(ens.records.size() - ens.failures.size()) +
                      " trajectories; mean sup energy " + csv_number(m.mean_sup_energy));
}

void run_energy_check(const ExperimentConfig& c, ExperimentResult& r) {
  const auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  auto o = ensemble_options(c);
  o.trajectory.snapshot_times = default_times(c, {0.25, 0.5, 1.0});
  o.trajectory.track_dissipation = true;
  const auto ens = simulate(c, spec, x, o, nullptr);
  add_failures(r, ens);

  const double trace = spec.covariance.trace();
  const double nu = spec.viscosity;
  io::CsvTable t({"t", "mean_energy_change", "mean_dissipation", "noise_input", "residual",
                  "std_error", "z_score", "pass"});
  std::vector<const TrajectoryRecord*> ok;
  for (const auto& rec : ens.records) {
    if (!rec.states.empty()) ok.push_back(&rec);
  }
  if (ok.empty()) throw Error("every trajectory failed");
  for (std::size_t s = 1; s < ok.front()->states.size(); ++s) {
    const double time = ok.front()->times[s];
    std::vector<double> change, diss, res;
    for (const auto* rec : ok) {
      const double e0 = std::pow(sobolev_norm(rec->states[0], 0.0), 2);
      const double e = std::pow(sobolev_norm(rec->states[s], 0.0), 2);
      change.push_back(e - e0);
      diss.push_back(2.0 * nu * rec->dissipation[s]);
      res.push_back(e - e0 + 2.0 * nu * rec->dissipation[s] - time * trace);
    }
    const auto m = stats::mean_estimate(res);
    const double z = m.std_error > 0.0 ? m.mean / m.std_error : 0.0;
    const bool pass = std::abs(z) <= c.stats.z_tolerance;
    r.pass = r.pass && pass;
    t.add_row({csv_number(time), csv_number(stats::mean_estimate(change).mean),
               csv_number(stats::mean_estimate(diss).mean), csv_number(time * trace),
               csv_number(m.mean), csv_number(m.std_error), csv_number(z), flag(pass)});
    r.summary.push_back("energy identity at t=" + csv_number(time) + ": residual " +
                        csv_number(m.mean) + " (z=" + csv_number(z) + ")");
  }
  r.artifacts.push_back({"energy_identity.csv", t.str()});
}

void run_ou_check(const ExperimentConfig& c, ExperimentResult& r) {
  auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  const auto ref = OUReference::build(spec.covariance, c.dynamics.F, spec.viscosity,
                                      c.run.horizon, &x);
  io::CsvTable t({"source", "i", "j", "mode_i", "mode_j", "expected", "estimate", "std_error",
                  "z_score", "pass"});
  bool exact_pass = true, sde_pass = true;
  const auto draws = ou_draws(ref, c.run.seed, c.run.n_traj, c.run.workers);
  covariance_rows(t, "exact", draws, ref, c.stats.exact_z_tolerance, exact_pass);

  spec.nonlinear = false;
  const auto ens = run_ensemble(x, spec, c.run.horizon, c.run.dt, c.run.n_traj, c.run.seed,
                                ensemble_options(c));
  add_failures(r, ens);
  const auto samples = projected_samples(ens, c.dynamics.F, ens.records.front().states.size() - 1);
  covariance_rows(t, "linear_sde", samples, ref, c.stats.z_tolerance, sde_pass);
  r.artifacts.push_back({"ou_covariance.csv", t.str()});
  r.pass = exact_pass && sde_pass;
  r.summary.push_back(std::string("exact OU draws: ") + (exact_pass ? "PASS" : "FAIL"));
  r.summary.push_back(std::string("linear SDE endpoint: ") + (sde_pass ? "PASS" : "FAIL"));
}

void run_girsanov(const ExperimentConfig& c, ExperimentResult& r) {
  const auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  auto o = ensemble_options(c);
  o.trajectory.snapshot_times = default_times(c, {0.5, 1.0});
  o.trajectory.track_girsanov = true;
  const auto ens = run_ensemble(x, spec, c.run.horizon, c.run.dt, c.run.n_traj, c.run.seed, o);
  add_failures(r, ens);

  io::CsvTable mart({"t", "mean_weight", "std_error", "z_score", "pass"});
  std::vector<const TrajectoryRecord*> ok;
  for (const auto& rec : ens.records) {
    if (!rec.states.empty()) ok.push_back(&rec);
  }
  if (ok.empty()) throw Error("every trajectory failed");
  const std::size_t last = ok.front()->states.size() - 1;
  std::vector<double> final_weights;
  for (std::size_t s = 1; s <= last; ++s) {
    std::vector<double> w;
    for (const auto* rec : ok) w.push_back(rec->girsanov[s].weight());
    const auto m = stats::mean_estimate(w);
    const double z = m.std_error > 0.0 ? (m.mean - 1.0) / m.std_error : 0.0;
    const bool pass = std::abs(z) <= c.stats.z_tolerance;
    r.pass = r.pass && pass;
    mart.add_row({csv_number(ok.front()->times[s]), csv_number(m.mean), csv_number(m.std_error),
                  csv_number(z), flag(pass)});
    if (s == last) final_weights = std::move(w);
  }
  const auto ref = OUReference::build(spec.covariance, c.dynamics.F, spec.viscosity,
                                      c.run.horizon, &x);
  EquivalenceOptions eo;
  eo.z_tolerance = c.stats.z_tolerance;
  eo.ks_alpha = c.stats.ks_alpha;
  eo.min_effective_sample_size = c.stats.min_effective_sample_size;
  const auto rep = reweighted_equivalence_test(projected_samples(ens, c.dynamics.F, last),
                                               final_weights, ref, eo);
  r.pass = r.pass && rep.pass;
  r.artifacts.push_back({"girsanov_martingale.csv", mart.str()});
  r.artifacts.push_back({"girsanov_equivalence.csv", rep.csv()});
  r.summary.push_back(rep.summary_line());
}

void run_malliavin(const ExperimentConfig& c, ExperimentResult& r) {
  const auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  const std::size_t n = c.run.n_traj;
  std::vector<MalliavinMatrix> matrices(n);
  std::vector<std::string> errors(n);
  parallel_for(n, c.run.workers == 0 ? default_workers() : c.run.workers, [&](std::size_t i) {
    try {
      const FourierState start = c.dynamics.stationary
                                     ? stationary_start(spec, c.run.burn_in, c.run.dt, c.run.seed, i)
                                     : x;
      auto sys = make_malliavin_system(start, spec, c.run.horizon, c.run.dt,
                                       Functional::coordinates(c.dynamics.F), c.run.seed, i);
      sys.stride = c.malliavin.stride;
      matrices[i] = assemble_matrix(sys, sys.steps());
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  });
  const std::size_t d = c.dynamics.F.size();
  std::vector<std::string> header = {"trajectory", "trace", "lambda_min", "lambda_max",
                                     "relative_min"};
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) header.push_back("m_" + std::to_string(i) + "_" + std::to_string(j));
  }
  io::CsvTable t(header);
  std::vector<MalliavinMatrix> ok;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      r.failures.push_back({i, errors[i]});
      continue;
    }
    const auto& m = matrices[i];
    const auto ev = m.eigenvalues();
    const double tr = m.trace();
    std::vector<std::string> row = {std::to_string(i), csv_number(tr), csv_number(ev.front()),
                                    csv_number(ev.back()),
                                    csv_number(tr > 0.0 ? ev.front() / tr : 0.0)};
    for (double e : m.entries()) row.push_back(csv_number(e));
    t.add_row(std::move(row));
    ok.push_back(m);
  }
  if (ok.empty()) throw Error("every trajectory failed");
  std::vector<double> thresholds = {c.stats.nondegeneracy_threshold};
  for (double th : {1e-8, 1e-4}) {
    if (th > thresholds.back()) thresholds.push_back(th);
  }
  const auto rep = nondegeneracy_report(ok, thresholds);
  io::CsvTable s({"relative_threshold", "fraction_below"});
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i) {
    s.add_row({csv_number(rep.thresholds[i]), csv_number(rep.fraction_below[i])});
  }
  r.pass = rep.degenerate == 0;
  r.artifacts.push_back({"malliavin_matrices.csv", t.str()});
  r.artifacts.push_back({"malliavin_summary.csv", s.str()});
  r.summary.push_back(rep.text());
}

std::vector<double> endpoint_samples(const ExperimentConfig& c, ExperimentResult& r) {
  const auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  auto o = ensemble_options(c);
  o.trajectory.snapshot_times.clear();
  const auto ens = simulate(c, spec, x, o, nullptr);
  add_failures(r, ens);
  std::size_t last = 0;
  for (const auto& rec : ens.records) {
    if (!rec.states.empty()) last = rec.states.size() - 1;
  }
  return projected_samples(ens, c.dynamics.F, last);
}

void fit_rows(io::CsvTable& t, const std::string& sampler, const BesovReport& rep) {
  auto row = [&](const ExponentFit& f) {
    t.add_row({sampler, f.id, csv_number(f.slope), csv_number(f.intercept),
               csv_number(f.slope_error), std::to_string(f.points), flag(f.valid)});
  };
  row(rep.envelope_fit);
  for (const auto& f : rep.phi_fits) row(f);
}

void envelope_rows(io::CsvTable& t, const std::string& sampler, const BesovReport& rep) {
  for (std::size_t i = 0; i < rep.envelope_h.size(); ++i) {
    t.add_row({sampler, csv_number(rep.envelope_h[i]), csv_number(rep.envelope[i]),
               csv_number(rep.envelope_std_error[i])});
  }
}

void run_besov_weak(const ExperimentConfig& c, ExperimentResult& r) {
  const auto samples = endpoint_samples(c, r);
  const std::size_t d = c.dynamics.F.size();
  WeakExperimentOptions wo;
  wo.n = c.besov.n;
  wo.alpha = c.besov.alpha;
  wo.stationary = c.dynamics.stationary;
  wo.h_magnitudes = c.besov.h;
  wo.noise_floor_z = c.besov.floor_z;
  wo.slope_tolerance = c.stats.slope_tolerance;
  wo.max_omega = c.besov.max_omega;
  const auto rep = weak_exponent_experiment(samples, d, wo);

  const auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  const auto ref = c.dynamics.stationary
                       ? OUReference::build(spec.covariance, c.dynamics.F, spec.viscosity,
                                            c.run.burn_in + c.run.horizon)
                       : OUReference::build(spec.covariance, c.dynamics.F, spec.viscosity,
                                            c.run.horizon, &x);
  const auto control_samples = ou_draws(ref, c.run.seed, samples.size() / d, c.run.workers);
  const auto control = weak_exponent_experiment(control_samples, d, wo);
  const bool control_ok =
      control.envelope_fit.valid && control.envelope_fit.slope >= c.stats.control_min_slope;

  io::CsvTable env({"sampler", "h_magnitude", "envelope", "std_error"});
  envelope_rows(env, "dynamics", rep);
  envelope_rows(env, "gaussian_control", control);
  io::CsvTable fits({"sampler", "id", "slope", "intercept", "slope_error", "points", "valid"});
  fit_rows(fits, "dynamics", rep);
  fit_rows(fits, "gaussian_control", control);

  r.pass = rep.verdict == BesovVerdict::Pass && control_ok;
  r.artifacts.push_back({"besov_estimates.csv", rep.estimates_csv()});
  r.artifacts.push_back({"besov_control_estimates.csv", control.estimates_csv()});
  r.artifacts.push_back({"besov_envelope.csv", env.str()});
  r.artifacts.push_back({"besov_fits.csv", fits.str()});
  r.summary.push_back(rep.text());
  r.summary.push_back("gaussian control envelope slope " + csv_number(control.envelope_fit.slope) +
                      " (need >= " + csv_number(c.stats.control_min_slope) + "): " +
                      (control_ok ? "PASS" : "FAIL"));
}

void run_besov_density(const ExperimentConfig& c, ExperimentResult& r) {
  const auto samples = endpoint_samples(c, r);
  const std::size_t d = c.dynamics.F.size();
  const std::size_t n = samples.size() / d;
  const auto [lo, hi] = sample_box(samples, d, c.density.box_width);
  const GridGeometry coarse(lo, hi, std::vector<std::size_t>(d, c.density.cells));
  const GridGeometry fine = coarse.refined(c.density.refine);

  const std::span<const double> all(samples);
  const std::size_t half = n / 2;
  const auto first = estimate_density(all.subspan(0, half * d), coarse);
  const auto second = estimate_density(all.subspan(half * d, half * d), coarse);
  const double l1 = l1_distance(first.density, second.density);
  const auto dc = estimate_density(all, coarse);
  const auto df = estimate_density(all, fine);
  const auto lp = lp_membership_report(dc.density, df.density, d, c.stats.lp_tolerance);
  const LpEntry& gate = lp.entries.at(lp.entries.size() / 2);

  io::CsvTable checks({"check", "value", "threshold", "pass"});
  const bool l1_ok = l1 < c.stats.l1_tolerance;
  const bool lp_ok = gate.relative_change <= c.stats.lp_tolerance;
  const bool atom_ok = df.max_cell_mass < c.stats.atom_fraction;
  checks.add_row({"l1_half_ensemble_distance", csv_number(l1), csv_number(c.stats.l1_tolerance),
                  flag(l1_ok)});
  checks.add_row({"lp_relative_change_p" + csv_number(gate.p), csv_number(gate.relative_change),
                  csv_number(c.stats.lp_tolerance), flag(lp_ok)});
  checks.add_row({"max_cell_mass", csv_number(df.max_cell_mass), csv_number(c.stats.atom_fraction),
                  flag(atom_ok)});

  // Dyadic steps down to the grid resolution, at most five levels.
  BesovReport semi;
  const double max_spacing =
      *std::max_element(df.density.grid.spacing.begin(), df.density.grid.spacing.end());
  const int levels = std::min(5, static_cast<int>(std::floor(-std::log2(max_spacing))));
  if (levels >= 1) {
    std::vector<double> dir(d, 1.0 / std::sqrt(double(d)));
    const auto sweep = dyadic_aligned_sweep(df.density.grid, dir, levels);
    const double alpha_n = predicted_exponent(c.besov.alpha, c.besov.n, c.dynamics.stationary);
    for (double s : {0.25, 0.5, alpha_n}) {
      if (s < double(c.besov.n)) {
        semi.seminorms.push_back(besov_seminorm_estimate(df.density, s, c.besov.n, sweep));
      }
    }
  }

  r.pass = l1_ok && lp_ok && atom_ok;
  r.artifacts.push_back({"density_checks.csv", checks.str()});
  r.artifacts.push_back({"density_lp.csv", lp.csv()});
  r.artifacts.push_back({"besov_seminorm.csv", semi.seminorm_csv()});
  r.artifacts.push_back({"density.bin", io::encode_density(df.density)});
  r.summary.push_back("L1 distance between half ensembles " + csv_number(l1) + ", L^" +
                      csv_number(gate.p) + " change under refinement " +
                      csv_number(gate.relative_change) + ", max cell mass " +
                      csv_number(df.max_cell_mass) + ", out-of-box fraction " +
                      csv_number(df.out_of_box_fraction));
}

/// Continues a Galerkin path from its state at step n0 with the F-component
/// of the nonlinearity switched off, reusing the same noise steps.
FourierState split_continuation(const FourierState& anchor, const DynamicsSpec& spec,
                                const StepFactors& factors, std::size_t n0, std::size_t n_end,
                                const NoiseSource& noise) {
  const SplitAnchor a{double(n0) * factors.dt, anchor};
  StepContext ctx;
  ctx.split_active = true;
  ctx.anchor = &a;
  FourierState s = anchor;
  std::vector<double> dW(s.size());
  for (std::size_t n = n0; n < n_end; ++n) {
    noise.increment(n, dW);
    s = step(s, spec, factors, double(n) * factors.dt, dW, ctx);
  }
  return s;
}

void run_splitting_rate(const ExperimentConfig& c, ExperimentResult& r) {
  const auto spec = make_dynamics(c);
  const auto x = initial_state(c, spec.basis());
  const double dt = c.run.dt;
  const std::size_t N = grid_steps(c.run.horizon, dt, "run.horizon");
  const auto& eps = c.splitting.epsilons;
  const auto& modes = c.splitting.modes;
  std::vector<std::size_t> eps_steps;
  for (double e : eps) eps_steps.push_back(grid_steps(e, dt, "splitting epsilon"));
  std::vector<DynamicsSpec> split_specs;
  for (SplitMode m : modes) {
    DynamicsSpec s = spec;
    s.variant = Variant::Split;
    s.split_mode = m;
    split_specs.push_back(std::move(s));
  }
  const StepFactors factors(spec, dt);
  const std::size_t n = c.run.n_traj;
  // errors[(i * |modes| + m) * |eps| + e]
  std::vector<double> errors(n * modes.size() * eps.size(), 0.0);
  std::vector<std::string> failed(n);
  parallel_for(n, c.run.workers == 0 ? default_workers() : c.run.workers, [&](std::size_t i) {
    try {
      const FourierState start =
          c.dynamics.stationary ? stationary_start(spec, c.run.burn_in, dt, c.run.seed, i) : x;
      const CounterNoise noise(c.run.seed, i, dt);
      TrajectoryOptions o;
      for (std::size_t k : eps_steps) o.snapshot_times.push_back(double(N - k) * dt);
      const auto rec = run_trajectory(start, spec, c.run.horizon, dt, o, noise);
      const FourierState& end = rec.final_state();
      for (std::size_t e = 0; e < eps.size(); ++e) {
        const std::size_t n0 = N - eps_steps[e];
        const auto it = std::find(rec.steps.begin(), rec.steps.end(), n0);
        if (it == rec.steps.end()) throw Error("splitting anchor not recorded");
        const FourierState& anchor = rec.states[std::size_t(it - rec.steps.begin())];
        for (std::size_t m = 0; m < modes.size(); ++m) {
          const auto v = split_continuation(anchor, split_specs[m], factors, n0, N, noise);
          double sq = 0.0;
          for (std::size_t k : c.dynamics.F) sq += (end[k] - v[k]) * (end[k] - v[k]);
          errors[(i * modes.size() + m) * eps.size() + e] = std::sqrt(sq);
        }
      }
    } catch (const std::exception& ex) {
      failed[i] = ex.what();
      if (failed[i].empty()) failed[i] = "unknown error";
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!failed[i].empty()) r.failures.push_back({i, failed[i]});
  }

  io::CsvTable table({"mode", "epsilon", "mean_error", "std_error", "n"});
  io::CsvTable fits({"mode", "slope", "intercept", "slope_error", "threshold", "pass"});
  for (std::size_t m = 0; m < modes.size(); ++m) {
    std::vector<double> le, lerr;
    for (std::size_t e = 0; e < eps.size(); ++e) {
      std::vector<double> v;
      for (std::size_t i = 0; i < n; ++i) {
        if (failed[i].empty()) v.push_back(errors[(i * modes.size() + m) * eps.size() + e]);
      }
      const auto est = stats::mean_estimate(v);
      const double eps_used = double(eps_steps[e]) * dt;
      table.add_row({to_string(modes[m]), csv_number(eps_used), csv_number(est.mean),
                     csv_number(est.std_error), std::to_string(est.n)});
      if (est.mean > 0.0) {
        le.push_back(std::log(eps_used));
        lerr.push_back(std::log(est.mean));
      }
    }
    const double threshold = modes[m] == SplitMode::Plain ? c.stats.split_min_slope
                                                          : c.stats.split_compensated_min_slope;
    stats::LinearFit fit;
    const bool valid = le.size() >= 2;
    if (valid) fit = stats::linear_fit(le, lerr);
    const bool pass = valid && fit.slope >= threshold;
    r.pass = r.pass && pass;
    fits.add_row({to_string(modes[m]), csv_number(valid ? fit.slope : NAN),
                  csv_number(valid ? fit.intercept : NAN),
                  csv_number(valid ? fit.slope_error : NAN), csv_number(threshold), flag(pass)});
    r.summary.push_back(to_string(modes[m]) + " splitting slope " +
                        csv_number(valid ? fit.slope : NAN) + " (need >= " +
                        csv_number(threshold) + "): " + (pass ? "PASS" : "FAIL"));
  }
  r.artifacts.push_back({"splitting.csv", table.str()});
  r.artifacts.push_back({"splitting_fit.csv", fits.str()});
}

std::string command_line(const ExperimentConfig& c, unsigned workers) {
  return "snslab " + to_string(c.run.kind) + " --config config.resolved.cfg --seed " +
         std::to_string(c.run.seed) + " --out " + c.run.out + " --workers " +
         std::to_string(workers);
}

}  // namespace

int ExperimentResult::exit_code() const {
  if (!failures.empty()) return 1;
  return pass ? 0 : 2;
}

const Artifact* ExperimentResult::find(const std::string& name) const {
  for (const auto& a : artifacts) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

BasisPtr make_basis(const ExperimentConfig& c) {
  return c.basis.modes ? galerkin_basis(c.basis.cutoff, c.basis.modes)
                       : build_basis(c.basis.cutoff);
}

DynamicsSpec make_dynamics(const ExperimentConfig& c) {
  const auto basis = make_basis(c);
  auto cov = c.noise.family == CovarianceFamily::PowerLaw
                 ? CovarianceSpec::power_law(basis, c.noise.alpha)
                 : CovarianceSpec::explicit_list(basis, c.noise.variances);
  DynamicsSpec spec(std::move(cov), c.dynamics.viscosity);
  spec.variant = c.dynamics.variant;
  spec.R = c.dynamics.R;
  spec.F = c.dynamics.F;
  spec.epsilon = c.dynamics.epsilon;
  spec.split_mode = c.dynamics.split_mode;
  spec.nonlinear = c.dynamics.nonlinear;
  return spec;
}

FourierState initial_state(const ExperimentConfig& c, const BasisPtr& basis) {
  FourierState x(basis);
  if (c.run.initial_amplitude == 0.0) return x;
  const std::size_t m = c.run.initial_modes ? c.run.initial_modes : basis->size();
  RngStream rng(0, 0, StreamPurpose::Test);
  for (std::size_t k = 0; k < m; ++k) x[k] = rng.normal();
  x *= c.run.initial_amplitude / sobolev_norm(x, 0.0);
  return x;
}

std::string config_hash(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.run.out = "-";
  c.run.workers = 0;
  return io::hex64(io::fnv1a(serialize_config(c)));
}

ExperimentResult compute_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult r;
  r.kind = config.run.kind;
  switch (config.run.kind) {
    case ExperimentKind::Simulate: run_simulate(config, r); break;
    case ExperimentKind::EnergyCheck: run_energy_check(config, r); break;
    case ExperimentKind::Girsanov: run_girsanov(config, r); break;
    case ExperimentKind::Malliavin: run_malliavin(config, r); break;
    case ExperimentKind::BesovWeak: run_besov_weak(config, r); break;
    case ExperimentKind::BesovDensity: run_besov_density(config, r); break;
    case ExperimentKind::OuCheck: run_ou_check(config, r); break;
    case ExperimentKind::SplittingRate: run_splitting_rate(config, r); break;
  }
  if (!r.failures.empty()) {
    r.summary.push_back(std::to_string(r.failures.size()) +
                        " trajectories failed; outputs use the remaining ones");
  }
  return r;
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  RunOutcome out;
  out.out_dir = config.run.out;
  const unsigned workers = config.run.workers ? config.run.workers : default_workers();
  nlohmann::ordered_json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["kind"] = to_string(config.run.kind);
  manifest["config_hash"] = config_hash(config);
  manifest["seed"] = config.run.seed;
  manifest["workers"] = workers;
  manifest["command"] = command_line(config, workers);

  std::error_code ec;
  std::filesystem::create_directories(out.out_dir, ec);
  if (ec) {
    out.error = "cannot create output directory " + out.out_dir.string() + ": " + ec.message();
    return out;
  }
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  auto commit = [&](const std::string& name, const std::string& contents) {
    io::write_file_atomic(out.out_dir / name, contents);
    files.push_back({{"name", name},
                     {"bytes", contents.size()},
                     {"fnv1a64", io::hex64(io::fnv1a(contents))}});
  };
  std::string status;
  try {
    commit("config.resolved.cfg", serialize_config(config));
    out.result = compute_experiment(config);
    for (const auto& a : out.result.artifacts) commit(a.name, a.contents);
    out.exit_code = out.result.exit_code();
    status = out.result.failures.empty() ? "complete" : "incomplete";
  } catch (const std::exception& e) {
    out.error = e.what();
    out.exit_code = 1;
    status = "error";
  }
  manifest["status"] = status;
  manifest["exit_code"] = out.exit_code;
  manifest["pass"] = out.exit_code == 0;
  if (!out.error.empty()) manifest["error"] = out.error;
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& f : out.result.failures) {
    failures.push_back({{"trajectory", f.index}, {"message", f.message}});
  }
  manifest["failures"] = failures;
  manifest["summary"] = out.result.summary;
  manifest["files"] = files;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    io::write_file_atomic(out.out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (out.error.empty()) out.error = e.what();
    out.exit_code = 1;
  }
  return out;
}

}  // namespace snslab
