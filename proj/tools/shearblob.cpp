// shearblob: command-line front end for the channel vortex-blob solver.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "shearblob/channel_kernel.hpp"
#include "shearblob/csv.hpp"
#include "shearblob/errors.hpp"
#include "shearblob/harness.hpp"
#include "shearblob/parallel.hpp"

namespace sb = shearblob;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  int workers = 0;
  std::vector<std::string> sets;
};

sb::ScenarioConfig resolve(const Common& c) {
  sb::ScenarioConfig cfg = c.preset.empty() ? sb::ScenarioConfig{} : sb::preset(c.preset);
  if (!c.config.empty()) cfg = sb::load_config(c.config, cfg);
  std::string extra;
  for (const auto& s : c.sets) extra += s + "\n";
  if (!extra.empty()) cfg = sb::parse_config(extra, cfg);
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

int report_checks(const std::vector<sb::oracle::OracleCheck>& checks, const std::string& out_dir) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << sb::csv::num(c.value)
              << "  tol=" << sb::csv::num(c.tolerance) << '\n';
    ok = ok && c.pass;
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    sb::oracle::write_oracle_report((std::filesystem::path(out_dir) / "oracle_report.csv").string(), checks);
  }
  return ok ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vortex-blob simulator for 2D Euler in a channel with background shear"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, "Scenario file (key = value lines)");
  app.add_option("--preset", common.preset, "Built-in scenario")
      ->check(CLI::IsMember(sb::preset_names()));
  app.add_option("--out", common.out, "Output directory");
  app.add_option("--workers", common.workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--set", common.sets, "Override a config key (key=value), repeatable");

  auto* check_profile = app.add_subcommand("check-profile", "Report the (H1)/(H2)/non-stagnation checks");

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write diagnostics, checkpoints, manifest");
  bool quiet = false;
  simulate->add_flag("--quiet", quiet, "No per-slice progress on stderr");

  auto* selftest = app.add_subcommand("kernel-selftest", "Kernel invariant suite");
  double envelope_scale = 1.0;
  selftest->add_option("--envelope-scale", envelope_scale, "Multiply the screening constant (forces failures)")
      ->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit-decay", "Fit an exponential decay rate to a diagnostics column");
  std::string fit_path, fit_column = "local_l1";
  double t_lo = 0.0, t_hi = 1e300, m_f_override = -1.0;
  fit->add_option("diagnostics", fit_path, "diagnostics.csv")->required()->check(CLI::ExistingFile);
  fit->add_option("--column", fit_column, "Column to fit");
  fit->add_option("--t-lo", t_lo, "Window start");
  fit->add_option("--t-hi", t_hi, "Window end");
  fit->add_option("--m-f", m_f_override, "Reference inf f (default: from the run manifest)");

  auto* prop41 = app.add_subcommand("prop41-check", "Check dM/dt <= -(pi delta/4) int d|w|e^{-ax}");
  std::string p41_path;
  double p41_delta = -1.0;
  prop41->add_option("diagnostics", p41_path, "diagnostics.csv")->required()->check(CLI::ExistingFile);
  prop41->add_option("--delta", p41_delta, "delta (default: the run's delta)");

  auto* ocmp = app.add_subcommand("oracle-compare", "Fast path against direct summation and field checks");
  int targets = 1000;
  ocmp->add_option("--targets", targets, "Random target count")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every malformed command line is a validation failure.
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (check_profile->parsed()) {
      const sb::ScenarioConfig cfg = resolve(common);
      const auto profile = sb::build_profile(cfg.profile);
      std::cout << "profile=" << profile.label() << '\n'
                << sb::format_hypothesis_report(sb::hypothesis_report(profile, sb::kProfileGrid, cfg.profile.c_star));
      return 0;
    }
    if (simulate->parsed()) {
      sb::ScenarioConfig cfg = resolve(common);
      if (cfg.output_dir.empty()) cfg.output_dir = "run-" + cfg.name;
      sb::RunOptions opts;
      opts.out_dir = cfg.output_dir;
      opts.workers = sb::resolve_workers(common.workers);
      if (!quiet) {
        opts.on_record = [](const sb::DiagnosticsRecord& r) {
          std::cerr << "t=" << r.t << "  M=" << r.weighted_mass << "  local_l1=" << r.local_l1 << '\n';
        };
      }
      const sb::RunResult res = sb::run_scenario(cfg, opts);
      std::cout << "wrote " << res.rows.size() << " slices to " << cfg.output_dir << '\n';
      if (res.first_energy.coarse) {
        std::cout << "warning: excess energy changed by " << sb::csv::num(res.first_energy.refinement_change)
                  << " under grid halving (> 5%)\n";
      }
      return 0;
    }
    if (selftest->parsed()) {
      return report_checks(sb::oracle::kernel_selftest(sb::kEnvelopeConstant * envelope_scale), common.out);
    }
    if (fit->parsed()) {
      const auto series = sb::read_diagnostics_column(fit_path, fit_column);
      const sb::DecayFit f = sb::fit_decay_rate(series, t_lo, t_hi);
      std::cout << "rate " << sb::csv::num(f.rate) << "\nr2 " << sb::csv::num(f.r2) << '\n';
      double m_f = m_f_override;
      if (m_f < 0.0) {
        if (const auto info = sb::read_manifest_for(fit_path)) m_f = info->m_f;
      }
      if (m_f >= 0.0) std::cout << "reference m_f/2 " << sb::csv::num(0.5 * m_f) << '\n';
      return 0;
    }
    if (prop41->parsed()) {
      const auto rows = sb::read_diagnostics(p41_path);
      double scale = 1.0;
      const auto info = sb::read_manifest_for(p41_path);
      if (p41_delta >= 0.0) {
        if (!info || !(info->delta > 0.0)) {
          throw sb::ValidationError("--delta needs the run manifest's delta to rescale damping_rhs");
        }
        scale = p41_delta / info->delta;
      }
      const sb::Prop41Result r = sb::prop41_check(rows, scale);
      std::cout << sb::format_prop41(r);
      return r.pass ? 0 : kExitValidation;
    }
    if (ocmp->parsed()) {
      const sb::ScenarioConfig cfg = resolve(common);
      return report_checks(sb::oracle_compare(cfg, targets, sb::resolve_workers(common.workers)),
                           common.out.empty() ? cfg.output_dir : common.out);
    }
  } catch (const sb::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const sb::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
