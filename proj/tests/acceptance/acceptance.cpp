// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes. Usage: snslab_acceptance [output-dir] [criterion...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "snslab/harness.hpp"
#include "snslab/io.hpp"
#include "snslab/malliavin.hpp"
#include "snslab/stats.hpp"

using namespace snslab;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Verdict()> run;
};

std::filesystem::path g_out = "acceptance_out";

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

FourierState random_state(const BasisPtr& basis, std::uint64_t index) {
  RngStream rng(2024, index, StreamPurpose::Test);
  FourierState u(basis);
  const double scale = std::pow(10.0, 4.0 * rng.uniform() - 2.0);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = scale * rng.normal();
  return u;
}

ExperimentConfig base_config(ExperimentKind kind, const std::string& dir) {
  ExperimentConfig c;
  c.run.kind = kind;
  c.basis.cutoff = 2;
  c.dynamics.viscosity = 1.0;
  c.noise.alpha = 3.0;
  c.run.horizon = 1.0;
  c.run.seed = 20240101;
  c.run.workers = 1;
  c.run.out = (g_out / dir).string();
  return c;
}

/// Runs the experiment on disk; `ok` is its statistical verdict.
ExperimentResult run_on_disk(const ExperimentConfig& c, bool& ok, std::string& note) {
  const auto out = run_experiment(c);
  ok = out.exit_code == 0;
  if (!out.error.empty()) note = " error: " + out.error;
  if (!out.result.failures.empty()) {
    note += " " + std::to_string(out.result.failures.size()) + " trajectory failures";
  }
  return out.result;
}

std::vector<std::vector<std::string>> table(const ExperimentResult& r, const std::string& name) {
  const auto* a = r.find(name);
  if (!a) throw Error("missing artifact " + name);
  return io::parse_csv(a->contents);
}

// 1. B identities on 200 random pairs for each cutoff 1..4.
Verdict bilinear_identities() {
  double worst = 0.0;
  for (int cutoff = 1; cutoff <= 4; ++cutoff) {
    const auto basis = build_basis(cutoff);
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto u = random_state(basis, 2 * i + 1000 * cutoff);
      const auto v = random_state(basis, 2 * i + 1 + 1000 * cutoff);
      const double nu = sobolev_norm(u, 0.0), nv = sobolev_norm(v, 0.0);
      const double scale = nu * nv * (nu + nv);
      const double orth = std::abs(inner_product(bilinear(u, v), v));
      const double anti1 = std::abs(inner_product(u, bilinear(v, v)) + inner_product(v, bilinear(v, u)));
      const double anti2 = std::abs(inner_product(v, bilinear(u, u)) + inner_product(u, bilinear(u, v)));
      worst = std::max({worst, orth / scale, anti1 / scale, anti2 / scale});
    }
  }
  return {worst <= 1e-12, "max relative defect " + fmt("%.3g", worst) + " (bound 1e-12) over 800 pairs"};
}

// 2. Ito energy balance at t in {0.25, 0.5, 1}.
Verdict energy_identity() {
  auto c = base_config(ExperimentKind::EnergyCheck, "c02_energy");
  c.run.dt = 1e-3;
  c.run.n_traj = 5000;
  c.run.snapshots = {0.25, 0.5, 1.0};
  c.run.initial_amplitude = 1.0;
  c.stats.z_tolerance = 3.0;
  bool ok = false;
  std::string note;
  const auto r = run_on_disk(c, ok, note);
  std::string detail;
  for (const auto& row : table(r, "energy_identity.csv")) {
    if (row[0] == "t") continue;
    detail += "t=" + row[0] + " z=" + fmt("%.2f", std::stod(row[6])) + "; ";
  }
  return {ok, detail + "tolerance 3 SE" + note};
}

// 3. Exact OU draws (4 SE) and the linear SDE endpoint (3 SE) against Q_F.
Verdict ou_reference() {
  auto c = base_config(ExperimentKind::OuCheck, "c03_ou");
  c.run.dt = 1e-2;
  c.run.n_traj = 100000;
  c.dynamics.F = {0, 12};
  c.run.initial_amplitude = 0.5;
  c.stats.exact_z_tolerance = 4.0;
  c.stats.z_tolerance = 3.0;
  bool ok = false;
  std::string note;
  const auto r = run_on_disk(c, ok, note);
  double zmax_exact = 0.0, zmax_sde = 0.0;
  for (const auto& row : table(r, "ou_covariance.csv")) {
    if (row[0] == "source") continue;
    const double z = std::abs(std::stod(row[8]));
    (row[0] == "exact" ? zmax_exact : zmax_sde) = std::max(row[0] == "exact" ? zmax_exact : zmax_sde, z);
  }
  return {ok, "max |z| exact " + fmt("%.2f", zmax_exact) + " (<= 4), linear SDE " +
                  fmt("%.2f", zmax_sde) + " (<= 3), 1e5 samples" + note};
}

// 4. Girsanov martingale and reweighted equivalence with the OU law.
Verdict girsanov() {
  auto c = base_config(ExperimentKind::Girsanov, "c04_girsanov");
  c.run.dt = 1e-3;
  c.run.n_traj = 20000;
  c.dynamics.F = {0, 1};
  c.run.snapshots = {1.0};
  c.stats.z_tolerance = 3.0;
  c.stats.ks_alpha = 0.01;
  bool ok = false;
  std::string note;
  const auto r = run_on_disk(c, ok, note);
  const auto mart = table(r, "girsanov_martingale.csv");
  return {ok, "E[G_1] = " + mart.back()[1] + " +- " + fmt("%.3g", std::stod(mart.back()[2])) +
                  "; " + r.summary.back() + note};
}

// 5. Galerkin and truncated paths coincide bitwise before tau_R.
Verdict weak_strong() {
  const auto basis = build_basis(2);
  DynamicsSpec gal(CovarianceSpec::power_law(basis, 3.0), 1.0);
  const FourierState x(basis);
  const double dt = 1e-3;
  const std::size_t n = 100;
  TrajectoryOptions o;
  o.record_every_step = true;
  std::vector<TrajectoryRecord> g(n);
  std::vector<double> sup(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = run_trajectory(x, gal, 1.0, dt, o, 77, i);
    for (const auto& s : g[i].states) sup[i] = std::max(sup[i], std::pow(sobolev_norm(s, 1.0), 2));
  }
  auto sorted = sup;
  std::sort(sorted.begin(), sorted.end());
  const double R = 0.5 * (sorted[69] + sorted[70]);
  DynamicsSpec tr = gal;
  tr.variant = Variant::Truncated;
  tr.R = R;
  std::size_t triggered = 0, mismatches = 0, compared = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = run_trajectory(x, tr, 1.0, dt, o, 77, i);
    const std::size_t last = std::min(t.tau_step, t.states.size() - 1);
    if (t.tau_step < t.states.size()) ++triggered;
    for (std::size_t m = 0; m <= last; ++m) {
      ++compared;
      if (std::memcmp(t.states[m].coeffs().data(), g[i].states[m].coeffs().data(),
                      t.states[m].size() * sizeof(double)) != 0) {
        ++mismatches;
      }
    }
  }
  const double frac = double(triggered) / double(n);
  return {mismatches == 0 && frac >= 0.2 && frac <= 0.4,
          "R = " + fmt("%.4g", R) + ", " + std::to_string(triggered) + "/100 paths hit tau_R, " +
              std::to_string(mismatches) + " differing states out of " + std::to_string(compared) +
              " compared"};
}

// 6. eta against pathwise finite differences, and M in the linear regime.
Verdict malliavin_gradient() {
  const auto basis = build_basis(1);
  DynamicsSpec spec(CovarianceSpec::power_law(basis, 3.0), 1.0);
  spec.variant = Variant::Truncated;
  spec.R = 1e6;
  const double dt = 1e-4;
  FourierState x(basis);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.1 * double(k + 1);
  const std::vector<std::size_t> F = {0, 7};
  const auto sys = make_malliavin_system(x, spec, 1.0, dt, Functional::coordinates(F), 5, 0);
  const std::size_t N = sys.steps();
  const CounterNoise base(5, 0, dt);
  const auto ref = run_trajectory(x, spec, 1.0, dt, {}, base).final_state();

  double worst = 0.0;
  const std::vector<std::pair<std::size_t, double>> pairs = {
      {0, 0.0}, {3, 0.2}, {5, 0.5}, {8, 0.75}, {11, 0.9}};
  for (const auto& [k, s] : pairs) {
    const auto s_step = static_cast<std::size_t>(std::llround(s / dt));
    const double delta = 1e-3;
    const BumpedNoise bumped(base, s_step, k, delta);
    const auto up = run_trajectory(x, spec, 1.0, dt, {}, bumped).final_state();
    const auto eta = evolve_eta(sys, k, s_step, N).back();
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      const double fd = (up[m] - ref[m]) / delta;
      const double an = spec.covariance.stddev(k) * eta[m];
      num += (fd - an) * (fd - an);
      den += fd * fd;
    }
    worst = std::max(worst, std::sqrt(num / den));
  }

  const auto M = assemble_matrix(sys, N);
  double worst_m = 0.0, off = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double lam = basis->eigenvalues()[F[i]];
    const double sig2 = spec.covariance.variance(F[i]);
    const double exact = sig2 * -std::expm1(-2.0 * spec.viscosity * lam) / (2.0 * spec.viscosity * lam);
    worst_m = std::max(worst_m, std::abs(M(i, i) - exact) / exact);
    for (std::size_t j = 0; j < F.size(); ++j) {
      if (i != j) off = std::max(off, std::abs(M(i, j)));
    }
  }
  return {worst < 1e-3 && worst_m < 1e-6,
          "max FD relative error " + fmt("%.3g", worst) + " (< 1e-3) over 5 (k, s); M diagonal " +
              "relative error " + fmt("%.3g", worst_m) + " (< 1e-6), max off-diagonal " +
              fmt("%.2g", off)};
}

// 7. Smallest eigenvalue of M above 1e-12 trace on 500 truncated paths.
Verdict malliavin_nondegeneracy() {
  auto c = base_config(ExperimentKind::Malliavin, "c07_malliavin");
  c.run.dt = 1e-3;
  c.run.n_traj = 500;
  c.dynamics.variant = Variant::Truncated;
  c.dynamics.R = 5.0;
  c.dynamics.F = {0, 1};
  c.run.initial_amplitude = 0.5;
  c.stats.nondegeneracy_threshold = 1e-12;
  bool ok = false;
  std::string note;
  const auto r = run_on_disk(c, ok, note);
  double min_rel = INFINITY;
  std::size_t count = 0;
  for (const auto& row : table(r, "malliavin_matrices.csv")) {
    if (row[0] == "trajectory") continue;
    min_rel = std::min(min_rel, std::stod(row[4]));
    ++count;
  }
  return {ok && count == 500, std::to_string(count) + " matrices, smallest lambda_min/trace " +
                                  fmt("%.3g", min_rel) + " (> 1e-12)" + note};
}

// 8. Splitting error slopes, plain and stationary-compensated.
Verdict splitting_rate() {
  auto plain = base_config(ExperimentKind::SplittingRate, "c08_split_plain");
  plain.run.dt = 1.0 / 1024;
  plain.run.n_traj = 10000;
  plain.dynamics.F = {0, 1};
  plain.run.initial_amplitude = 0.5;
  plain.splitting.epsilons = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  plain.splitting.modes = {SplitMode::Plain};
  plain.stats.split_min_slope = 0.9;
  auto comp = plain;
  comp.run.out = (g_out / "c08_split_stationary").string();
  comp.dynamics.stationary = true;
  comp.run.burn_in = 1.0;
  comp.run.initial_amplitude = 0.0;
  comp.splitting.modes = {SplitMode::StationaryCompensated};
  comp.stats.split_compensated_min_slope = 1.2;
  bool ok1 = false, ok2 = false;
  std::string n1, n2;
  const auto r1 = run_on_disk(plain, ok1, n1);
  const auto r2 = run_on_disk(comp, ok2, n2);
  const double s1 = std::stod(table(r1, "splitting_fit.csv")[1][1]);
  const double s2 = std::stod(table(r2, "splitting_fit.csv")[1][1]);
  return {ok1 && ok2, "plain slope " + fmt("%.3f", s1) + " (>= 0.9, rate 1); compensated slope " +
                          fmt("%.3f", s2) + " (>= 1.2, target 1.3, rate 3/2)" + n1 + n2};
}

// 9. Weak Besov exponent with the sinusoid family and a Gaussian control.
Verdict besov_weak() {
  auto c = base_config(ExperimentKind::BesovWeak, "c09_besov_weak");
  c.run.dt = 1e-2;
  c.run.n_traj = 50000;
  c.dynamics.F = {0, 1};
  c.run.initial_amplitude = 0.5;
  c.besov.alpha = 0.5;
  c.besov.n = 2;
  c.besov.h = {0.5, 0.25, 0.125, 0.0625, 0.03125};
  c.stats.slope_tolerance = 0.2;
  c.stats.control_min_slope = 1.8;
  bool ok = false;
  std::string note;
  const auto r = run_on_disk(c, ok, note);
  double dyn = NAN, ctl = NAN;
  std::string pts;
  for (const auto& row : table(r, "besov_fits.csv")) {
    if (row[1] != "envelope") continue;
    (row[0] == "dynamics" ? dyn : ctl) = std::stod(row[2]);
    if (row[0] == "dynamics") pts = row[5];
  }
  const double alpha_n = predicted_exponent(0.5, 2, false);
  return {ok, "envelope slope " + fmt("%.3f", dyn) + " on " + pts + " scales (>= alpha_n - 0.2 = " +
                  fmt("%.3f", alpha_n - 0.2) + "); Gaussian control " + fmt("%.3f", ctl) +
                  " (>= 1.8)" + note};
}

// 10. Histogram sanity of the d = 2 projected law.
Verdict density_sanity() {
  auto c = base_config(ExperimentKind::BesovDensity, "c10_density");
  c.run.dt = 1e-2;
  c.run.n_traj = 100000;
  c.dynamics.F = {0, 1};
  c.run.initial_amplitude = 0.5;
  c.density.cells = 32;
  c.density.refine = 2;
  c.stats.l1_tolerance = 0.1;
  c.stats.lp_tolerance = 0.15;
  c.stats.atom_fraction = 0.01;
  bool ok = false;
  std::string note;
  const auto r = run_on_disk(c, ok, note);
  std::string detail;
  for (const auto& row : table(r, "density_checks.csv")) {
    if (row[0] == "check") continue;
    detail += row[0] + " " + fmt("%.4g", std::stod(row[1])) + " (< " + row[2] + "); ";
  }
  return {ok, detail + "1e5 samples" + note};
}

// 11. Byte-identical CSV outputs under a different worker count.
Verdict determinism() {
  std::vector<std::string> dirs = {"c03_ou", "c07_malliavin", "c09_besov_weak"};
  std::size_t files = 0, differing = 0;
  for (const auto& d : dirs) {
    const auto first = g_out / d;
    if (!std::filesystem::exists(first / "config.resolved.cfg")) {
      return {false, "missing reference run " + first.string()};
    }
    auto c = load_config((first / "config.resolved.cfg").string());
    c.run.workers = 3;
    c.run.out = (g_out / (d + "_workers3")).string();
    const auto out = run_experiment(c);
    if (out.exit_code == 1) return {false, "rerun of " + d + " failed: " + out.error};
    for (const auto& entry : std::filesystem::directory_iterator(first)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const auto other = out.out_dir / entry.path().filename();
      if (!std::filesystem::exists(other) || io::read_file(entry.path()) != io::read_file(other)) {
        ++differing;
      }
    }
  }
  return {files > 0 && differing == 0,
          std::to_string(files) + " CSV files from criteria 3, 7, 9 rerun with 3 workers, " +
              std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit)) {
      only.insert(std::stoi(a));
    } else {
      g_out = a;
    }
  }
  std::filesystem::create_directories(g_out);

  const std::vector<Criterion> criteria = {
      {1, "bilinear identities", 10, bilinear_identities},
      {2, "energy identity", 120, energy_identity},
      {3, "OU reference exactness", 60, ou_reference},
      {4, "Girsanov martingale and equivalence", 300, girsanov},
      {5, "weak-strong coincidence", 60, weak_strong},
      {6, "Malliavin gradient check", 120, malliavin_gradient},
      {7, "Malliavin nondegeneracy", 300, malliavin_nondegeneracy},
      {8, "splitting rate", 600, splitting_rate},
      {9, "weak Besov exponent", 600, besov_weak},
      {10, "density sanity", 300, density_sanity},
      {11, "determinism across worker counts", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s | %.1f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id,
                c.name, v.detail.c_str(), secs, c.limit_seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
