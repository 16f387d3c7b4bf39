#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "shearblob/errors.hpp"
#include "shearblob/harness.hpp"

using namespace shearblob;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shearblob_harness_" + name);
  fs::remove_all(p);
  return p;
}

// Couette patch, coarse enough to run in well under a second.
ScenarioConfig small_run() {
  ScenarioConfig c = preset("couette-patch");
  c.numerics.h = 0.1;
  c.numerics.dt = 0.02;
  c.numerics.t_end = 0.4;
  c.numerics.record_every = 2;
  c.diag.energy_spacing = 0.1;
  return c;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

#ifdef SHEARBLOB_CLI
int cli(const std::string& args) {
  const std::string cmd = std::string(SHEARBLOB_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
#endif

}  // namespace

TEST(Config, EveryPresetRoundTrips) {
  for (const auto& name : preset_names()) {
    const ScenarioConfig c = preset(name);
    const std::string text = format_config(c);
    EXPECT_EQ(format_config(parse_config(text)), text) << name;
  }
  EXPECT_EQ(preset_names().size(), 5u);
  EXPECT_THROW(preset("nope"), ValidationError);
}

TEST(Config, ParsesCommentsAndOverrides) {
  const ScenarioConfig c = parse_config(
      "# comment\nprofile.kind = sine-perturbed\nprofile.amp=0.2  # trailing\n\nnumerics.record_every = 3\n");
  EXPECT_EQ(c.profile.kind, "sine-perturbed");
  EXPECT_EQ(c.profile.amp, 0.2);
  EXPECT_EQ(c.numerics.record_every, 3);
  EXPECT_EQ(parse_config("numerics.dt = 0.005", c).profile.amp, 0.2);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("numerics.bogus = 1"), ValidationError);
  EXPECT_THROW(parse_config("numerics.h = abc"), ValidationError);
  EXPECT_THROW(parse_config("numerics.h = -0.1"), ValidationError);
  EXPECT_THROW(parse_config("numerics.integrator = leapfrog"), ValidationError);
  EXPECT_THROW(parse_config("just a line"), ValidationError);
  EXPECT_THROW(parse_config("diag.x_lo = 4\ndiag.x_hi = 3"), ValidationError);
}

TEST(Config, AmplitudeEchoedVerbatim) {
  ScenarioConfig c = preset("couette-patch");
  apply_setting(c, "init.amplitude", "0.1");
  bool found = false;
  for (const auto& [k, v] : config_entries(c)) {
    if (k == "init.amplitude") {
      EXPECT_EQ(v, "0.1");
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Presets, MatchDocumentedSetups) {
  const ScenarioConfig cp = preset("couette-patch");
  EXPECT_EQ(build_profile(cp.profile).label(), ShearProfile::couette().label());
  EXPECT_EQ(cp.init.amplitude, 0.1);
  EXPECT_EQ(cp.init.box.x_lo, -1.0);
  EXPECT_EQ(cp.init.box.y_hi, 0.75);
  const ShearProfile sine = build_profile(preset("nonstagnant-sine").profile);
  EXPECT_NEAR(sine.f(0.5), 1.05, 1e-15);
  EXPECT_EQ(build_profile(preset("nonstagnant-const").profile).f(0.3), 1.0);
  EXPECT_EQ(preset("boundary-touching").init.box.y_lo, 0.0);
  EXPECT_EQ(build_profile(preset("dipole").profile).sup_f(), 0.0);
}

TEST(Run, ZeroAmplitudeGivesZeroDiagnostics) {
  ScenarioConfig c = small_run();
  c.init.amplitude = 0.0;
  const RunResult r = run_scenario(c);
  ASSERT_EQ(r.rows.size(), 11u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.weighted_mass, 0.0);
    EXPECT_EQ(row.weighted_sup, 0.0);
    EXPECT_EQ(row.local_sup, 0.0);
    EXPECT_EQ(row.local_l1, 0.0);
    EXPECT_EQ(row.a_n, 0.0);
    EXPECT_EQ(row.excess_enstrophy, 0.0);
    EXPECT_EQ(row.excess_energy, 0.0);
    EXPECT_EQ(row.excess_casimir, 0.0);
    EXPECT_EQ(row.damping_rhs, 0.0);
  }
}

TEST(Run, DoublingRecordEveryHalvesRows) {
  ScenarioConfig a = small_run();
  ScenarioConfig b = a;
  b.numerics.record_every = 4;
  const RunResult ra = run_scenario(a), rb = run_scenario(b);
  ASSERT_EQ(ra.rows.size(), 11u);
  ASSERT_EQ(rb.rows.size(), 6u);
  for (std::size_t k = 0; k < rb.rows.size(); ++k) {
    EXPECT_EQ(format_record(rb.rows[k]), format_record(ra.rows[2 * k]));
  }
}

TEST(Run, DeterministicAcrossWorkerCounts) {
  const ScenarioConfig c = small_run();
  RunOptions one, four;
  four.workers = 4;
  const RunResult a = run_scenario(c, one), b = run_scenario(c, four);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) EXPECT_EQ(format_record(a.rows[k]), format_record(b.rows[k]));
}

TEST(Run, WritesRunDirectory) {
  const fs::path dir = scratch("run");
  ScenarioConfig c = small_run();
  RunOptions o;
  o.out_dir = dir.string();
  const RunResult r = run_scenario(c, o);
  EXPECT_EQ(read_diagnostics((dir / "diagnostics.csv").string()).size(), r.rows.size());
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "completed");
  EXPECT_EQ(manifest["preset"], "couette-patch");
  EXPECT_EQ(manifest["slices"].size(), r.rows.size());
  EXPECT_EQ(manifest["config"]["numerics.h"], "0.1");
  EXPECT_TRUE(manifest["profile_report"]["h1_ok"].get<bool>());
  for (const auto& s : manifest["slices"]) EXPECT_TRUE(fs::exists(dir / s["checkpoint"].get<std::string>()));

  // The echoed config reproduces the run bit for bit.
  const RunResult again = run_scenario(load_config((dir / "config.cfg").string()));
  ASSERT_EQ(again.rows.size(), r.rows.size());
  for (std::size_t k = 0; k < r.rows.size(); ++k) EXPECT_EQ(format_record(again.rows[k]), format_record(r.rows[k]));
  fs::remove_all(dir);
}

TEST(Run, CheckpointReloadReproducesRows) {
  const fs::path dir = scratch("reload");
  const ScenarioConfig c = small_run();
  RunOptions o;
  o.out_dir = dir.string();
  const RunResult r = run_scenario(c, o);
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  for (std::size_t k : {std::size_t{0}, std::size_t{3}, r.rows.size() - 1}) {
    const auto& slice = manifest["slices"][k];
    const DiagnosticsRecord back =
        record_from_checkpoint(c, (dir / slice["checkpoint"].get<std::string>()).string(), slice["t"].get<double>());
    EXPECT_EQ(format_record(back), format_record(r.rows[k])) << "slice " << k;
  }

  // Restarting from a checkpoint and advancing zero steps re-emits the row.
  ScenarioConfig restart = c;
  restart.init.kind = "checkpoint";
  restart.init.path = (dir / manifest["slices"][5]["checkpoint"].get<std::string>()).string();
  restart.init.t0 = manifest["slices"][5]["t"].get<double>();
  restart.numerics.t_end = restart.init.t0;
  const RunResult zero = run_scenario(restart);
  ASSERT_EQ(zero.rows.size(), 1u);
  EXPECT_EQ(format_record(zero.rows[0]), format_record(r.rows[5]));
  fs::remove_all(dir);
}

TEST(Run, AbortKeepsPartialOutputs) {
  // Two blobs 399.5 apart under Couette: the span grows past the fast
  // kernel's range at t ~ 1 and the run aborts.
  const fs::path dir = scratch("abort");
  fs::create_directories(dir);
  {
    std::ofstream ck(dir / "start.csv");
    ck << "x,y,area,omega0,fprime0\n0,0.5,0.01,0.1,1\n399.5,0.99,0.01,0.1,1\n";
  }
  ScenarioConfig c = preset("couette-patch");
  c.init.kind = "checkpoint";
  c.init.path = (dir / "start.csv").string();
  c.numerics.dt = 0.02;
  c.numerics.t_end = 2.0;
  c.diag.energy_spacing = 0.25;
  RunOptions o;
  o.out_dir = (dir / "run").string();
  EXPECT_THROW(run_scenario(c, o), NumericalError);
  const auto manifest = nlohmann::json::parse(read_file(dir / "run" / "manifest.json"));
  EXPECT_EQ(manifest["status"], "aborted");
  EXPECT_GT(manifest["steps"].get<long>(), 10);
  const auto rows = read_diagnostics((dir / "run" / "diagnostics.csv").string());
  EXPECT_GE(rows.size(), 2u);
  EXPECT_EQ(manifest["slices"].size(), rows.size());
  fs::remove_all(dir);
}

TEST(Run, RejectsFractionalStepCount) {
  ScenarioConfig c = small_run();
  c.numerics.t_end = 0.405;
  EXPECT_THROW(run_scenario(c), ValidationError);
}

TEST(Run, VorticityBoundTracked) {
  ScenarioConfig c = preset("nonstagnant-sine");
  c.numerics.h = 0.1;
  c.numerics.t_end = 0.2;
  c.init.passive_margin = 0.0;
  const RunResult r = run_scenario(c);
  EXPECT_TRUE(r.bound_held);
  EXPECT_LE(r.worst_vorticity_sup, r.vorticity_bound);
  EXPECT_NEAR(r.vorticity_bound, 0.1 + 0.05 * std::numbers::pi * std::numbers::pi, 1e-6);
}

TEST(Reports, HypothesisReportLines) {
  const std::string s = format_hypothesis_report(hypothesis_report(ShearProfile::constant(1.0), 256));
  EXPECT_NE(s.find("m_f=1\n"), std::string::npos);
  EXPECT_NE(s.find("nonstagnant=true\n"), std::string::npos);
  EXPECT_NE(s.find("h1_ok=true\n"), std::string::npos);
}

TEST(Reports, Prop41Table) {
  Prop41Result r;
  r.rows.push_back({0.1, -0.5, -0.4, 0.01, 0.11});
  r.worst_margin = 0.11;
  const std::string s = format_prop41(r);
  EXPECT_EQ(s, "t,dMdt,neg_damping_rhs,tol,margin\n0.10000000000000001,-0.5,-0.40000000000000002,"
               "0.01,0.11\nworst_margin 0.11\nPASS\n");
}

TEST(Reports, OracleCompareOnPreset) {
  ScenarioConfig c = preset("couette-patch");
  c.numerics.h = 0.1;
  const auto checks = oracle_compare(c, 200, 1);
  ASSERT_EQ(checks.size(), 3u);
  for (const auto& k : checks) EXPECT_TRUE(k.pass) << k.name << " " << k.value;
}

#ifdef SHEARBLOB_CLI
TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(cli("check-profile --preset nonstagnant-sine"), 0);
  EXPECT_EQ(cli("kernel-selftest"), 0);
  EXPECT_EQ(cli("kernel-selftest --envelope-scale 0.5"), 2);
  EXPECT_EQ(cli("simulate --preset nope"), 2);
  EXPECT_EQ(cli("simulate --set numerics.h=-1" + out), 2);
  EXPECT_EQ(cli("simulate --set numerics.dt=0.5" + out), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("simulate --quiet --preset couette-patch --set numerics.h=0.1 --set numerics.t_end=0.5 --set numerics.record_every=2" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_EQ(cli("prop41-check " + (dir / "diagnostics.csv").string()), 0);
  EXPECT_EQ(cli("fit-decay " + (dir / "diagnostics.csv").string() + " --column a_n"), 0);
  EXPECT_EQ(cli("fit-decay " + (dir / "diagnostics.csv").string() + " --column nope"), 2);
  EXPECT_EQ(cli("oracle-compare --preset couette-patch --set numerics.h=0.1 --targets 100" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "oracle_report.csv"));

  {
    std::ofstream ck(dir / "far.csv");
    ck << "x,y,area,omega0,fprime0\n0,0.5,0.01,0.1,1\n399.5,0.99,0.01,0.1,1\n";
  }
  EXPECT_EQ(cli("simulate --quiet --set init.kind=checkpoint --set init.path=" + (dir / "far.csv").string() +
                " --set numerics.dt=0.02 --set numerics.t_end=2 --set diag.energy_spacing=0.25 --out " +
                (dir / "far").string()),
            3);
  fs::remove_all(dir);
}
#endif
