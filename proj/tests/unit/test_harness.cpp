#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "snslab/harness.hpp"
#include "snslab/io.hpp"

using namespace snslab;

namespace {

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig c;
  c.run.kind = kind;
  c.run.dt = 1e-2;
  c.run.n_traj = 200;
  c.run.seed = 7;
  c.run.initial_amplitude = 0.5;
  c.run.workers = 1;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "snslab_harness_tests" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string header(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

}  // namespace

TEST_CASE("initial state is deterministic with the requested norm") {
  auto c = small(ExperimentKind::Simulate);
  c.run.initial_modes = 4;
  const auto basis = make_basis(c);
  const auto x = initial_state(c, basis);
  CHECK(sobolev_norm(x, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(x[3] != 0.0);
  CHECK(x[4] == 0.0);
  CHECK(x == initial_state(c, basis));
  c.run.initial_amplitude = 0.0;
  CHECK(sobolev_norm(initial_state(c, basis), 0.0) == 0.0);
}

TEST_CASE("config hash ignores output directory and worker count") {
  auto a = small(ExperimentKind::Simulate);
  auto b = a;
  b.run.out = "elsewhere";
  b.run.workers = 5;
  CHECK(config_hash(a) == config_hash(b));
  b.run.seed = 8;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("every experiment kind produces headed CSV tables") {
  for (auto kind : all_kinds()) {
    CAPTURE(to_string(kind));
    auto c = small(kind);
    if (kind == ExperimentKind::Malliavin) {
      c.dynamics.variant = Variant::Truncated;
      c.dynamics.R = 50.0;
      c.run.n_traj = 20;
    }
    if (kind == ExperimentKind::BesovDensity) c.run.n_traj = 2000;
    if (kind == ExperimentKind::SplittingRate) {
      c.run.dt = 1.0 / 64;
      c.splitting.epsilons = {0.25, 0.125, 0.0625};
    }
    const auto r = compute_experiment(c);
    CHECK(r.failures.empty());
    CHECK_FALSE(r.artifacts.empty());
    CHECK_FALSE(r.summary.empty());
    for (const auto& a : r.artifacts) {
      if (a.name.ends_with(".csv")) {
        const auto rows = io::parse_csv(a.contents);
        REQUIRE(rows.size() >= 2);
        for (const auto& row : rows) CHECK(row.size() == rows[0].size());
      }
    }
  }
}

TEST_CASE("ou-check compares the covariance and passes") {
  auto c = small(ExperimentKind::OuCheck);
  c.run.n_traj = 2000;
  const auto r = compute_experiment(c);
  CHECK(r.pass);
  CHECK(r.exit_code() == 0);
  const auto* t = r.find("ou_covariance.csv");
  REQUIRE(t);
  CHECK(header(t->contents) ==
        "source,i,j,mode_i,mode_j,expected,estimate,std_error,z_score,pass");
  CHECK(io::parse_csv(t->contents).size() == 1 + 2 * 3);
}

TEST_CASE("splitting-rate reports the error table and fitted slope") {
  auto c = small(ExperimentKind::SplittingRate);
  c.run.dt = 1.0 / 128;
  c.splitting.epsilons = {0.125, 0.0625, 0.03125};
  const auto r = compute_experiment(c);
  const auto* t = r.find("splitting.csv");
  REQUIRE(t);
  CHECK(header(t->contents) == "mode,epsilon,mean_error,std_error,n");
  const auto rows = io::parse_csv(r.find("splitting_fit.csv")->contents);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1][1]) > 0.7);
}

TEST_CASE("outputs are byte-identical across worker counts") {
  for (auto kind : {ExperimentKind::EnergyCheck, ExperimentKind::Girsanov,
                    ExperimentKind::SplittingRate, ExperimentKind::Malliavin}) {
    CAPTURE(to_string(kind));
    auto c = small(kind);
    if (kind == ExperimentKind::Malliavin) {
      c.dynamics.variant = Variant::Truncated;
      c.dynamics.R = 50.0;
      c.run.n_traj = 12;
    }
    if (kind == ExperimentKind::SplittingRate) {
      c.run.dt = 1.0 / 64;
      c.splitting.epsilons = {0.25, 0.125};
      c.dynamics.stationary = true;
    }
    const auto a = compute_experiment(c);
    c.run.workers = 3;
    const auto b = compute_experiment(c);
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
      CHECK(a.artifacts[i].name == b.artifacts[i].name);
      CHECK(a.artifacts[i].contents == b.artifacts[i].contents);
    }
  }
}

TEST_CASE("run_experiment writes artifacts, resolved config and manifest") {
  auto c = small(ExperimentKind::Simulate);
  c.run.n_traj = 5;
  c.run.snapshots = {0.5};
  c.run.out = scratch("simulate").string();
  const auto out = run_experiment(c);
  CHECK(out.exit_code == 0);
  const auto dir = out.out_dir;
  const auto resolved = load_config((dir / "config.resolved.cfg").string());
  CHECK(resolved == c);

  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["config_hash"] == config_hash(c));
  CHECK(manifest["command"].get<std::string>().find("snslab simulate --config") == 0);
  for (const auto& f : manifest["files"]) {
    const auto path = dir / f["name"].get<std::string>();
    CHECK(io::hex64(io::file_checksum(path)) == f["fnv1a64"].get<std::string>());
  }
  const auto snaps = io::read_snapshots(dir / "snapshots.bin");
  CHECK(snaps.header.mode_count == 36);
  CHECK(snaps.records.size() == 5 * 3);
  CHECK(snaps.records[4].trajectory == 1);
  CHECK(snaps.records[4].time == 0.5);
}

TEST_CASE("exit codes separate statistical failures from execution errors") {
  auto c = small(ExperimentKind::OuCheck);
  c.stats.z_tolerance = 1e-9;
  c.stats.exact_z_tolerance = 1e-9;
  c.run.out = scratch("fail").string();
  auto out = run_experiment(c);
  CHECK(out.exit_code == 2);
  CHECK(nlohmann::json::parse(io::read_file(out.out_dir / "manifest.json"))["status"] ==
        "complete");

  auto d = small(ExperimentKind::Simulate);
  d.run.n_traj = 3;
  d.run.initial_amplitude = 1e200;
  d.run.out = scratch("blowup").string();
  out = run_experiment(d);
  CHECK(out.exit_code == 1);
  const auto m = nlohmann::json::parse(io::read_file(out.out_dir / "manifest.json"));
  CHECK(m["status"] == "incomplete");
  CHECK(m["failures"].size() == 3);
  CHECK(std::filesystem::exists(out.out_dir / "trajectories.csv"));

  auto e = small(ExperimentKind::Simulate);
  e.run.out = "/proc/forbidden/dir";
  out = run_experiment(e);
  CHECK(out.exit_code == 1);
  CHECK_FALSE(out.error.empty());
}
