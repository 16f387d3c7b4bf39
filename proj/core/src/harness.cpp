#include "shearblob/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "shearblob/csv.hpp"
#include "shearblob/errors.hpp"

#ifndef SHEARBLOB_VERSION
#define SHEARBLOB_VERSION "unknown"
#endif

namespace shearblob {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string now_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

json report_json(const HypothesisReport& r) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"delta_max", r.delta_max},
              {"m_f", r.m_f},
              {"fpp_sup", r.fpp_sup},
              {"curvature_ratio_h2", finite_or_null(r.curvature_ratio_h2)},
              {"curvature_ratio_nonstag", finite_or_null(r.curvature_ratio_nonstag)},
              {"c_star", r.c_star},
              {"h1_ok", r.h1_ok},
              {"h2_ok", r.h2_ok},
              {"nonstagnant", r.nonstagnant},
              {"nonstag_curvature_ok", r.nonstag_curvature_ok}};
}

class Manifest {
 public:
  Manifest(std::string dir, const ScenarioConfig& cfg, const HypothesisReport& report,
           const DiagnosticsConfig& diag)
      : path_(dir.empty() ? std::string() : (fs::path(dir) / "manifest.json").string()) {
    json config = json::object();
    for (const auto& [k, v] : config_entries(cfg)) config[k] = v;
    doc_ = json{{"code_version", SHEARBLOB_VERSION},
                {"preset", cfg.name},
                {"config", config},
                {"profile_report", report_json(report)},
                {"resolved", {{"m_f", diag.m_f}, {"delta", diag.delta}}},
                {"start_time", now_iso()},
                {"end_time", nullptr},
                {"status", "running"},
                {"diagnostics", "diagnostics.csv"},
                {"slices", json::array()}};
    write();
  }

  void add_slice(double t, long step, const std::string& checkpoint) {
    json s{{"t", t}, {"step", step}};
    if (!checkpoint.empty()) s["checkpoint"] = checkpoint;
    doc_["slices"].push_back(std::move(s));
  }
  void set(const std::string& key, json value) { doc_[key] = std::move(value); }
  void finish(const std::string& status) {
    doc_["status"] = status;
    doc_["end_time"] = now_iso();
    write();
  }

 private:
  void write() const {
    if (path_.empty()) return;
    std::ofstream out(path_);
    if (!out) throw ValidationError("cannot write " + path_);
    out << std::setw(2) << doc_ << '\n';
  }

  std::string path_;
  json doc_;
};

std::string checkpoint_name(long step) {
  std::ostringstream name;
  name << "checkpoints/slice_" << std::setw(7) << std::setfill('0') << step << ".csv";
  return name.str();
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  RunResult res;
  Ensemble ens = build_ensemble(cfg);
  res.report = hypothesis_report(ens.profile, kProfileGrid, cfg.profile.c_star);
  res.diag = build_diagnostics(cfg, res.report);

  const double dt = cfg.numerics.dt;
  const double t0 = ens.t;
  const double span = cfg.numerics.t_end - t0;
  const long n_steps = std::lround(span / dt);
  if (span < 0.0 || std::abs(static_cast<double>(n_steps) * dt - span) > 1e-9 * std::max(1.0, std::abs(span))) {
    throw ValidationError("t_end - t0 must be a non-negative whole number of steps");
  }
  SimParams params{dt, cfg.numerics.t_end, cfg.numerics.integrator, cfg.numerics.record_every};
  if (!ens.blobs.empty()) check_time_step(ens, params, opts.workers);

  const std::string dir = opts.out_dir;
  if (!dir.empty()) {
    fs::create_directories(dir);
    if (opts.checkpoints) fs::create_directories(fs::path(dir) / "checkpoints");
    std::ofstream(fs::path(dir) / "config.cfg") << format_config(cfg);
  }
  Manifest manifest(dir, cfg, res.report, res.diag);

  res.vorticity_bound = vorticity_sup_bound(ens);
  // Round-off in f'(y) may exceed the exact bound by a few ulps.
  const double bound_slack = 1e-12 * std::max(1.0, res.vorticity_bound);

  std::ofstream csv_out;
  if (!dir.empty()) {
    csv_out.open(fs::path(dir) / "diagnostics.csv");
    if (!csv_out) throw ValidationError("cannot write diagnostics.csv in " + dir);
    csv_out << kDiagnosticsHeader << '\n';
  }

  auto record = [&](long k) {
    DiagnosticsConfig dc = res.diag;
    dc.energy_refinement_check = res.rows.empty();
    EnergyEstimate e;
    const DiagnosticsRecord r = compute_record(ens, dc, opts.workers, &e);
    if (res.rows.empty()) {
      res.first_energy = e;
      manifest.set("energy_check", json{{"refinement_change", e.refinement_change},
                                        {"tail_bound", e.tail_bound},
                                        {"coarse", e.coarse}});
    }
    res.rows.push_back(r);
    if (csv_out.is_open()) csv_out << format_record(r) << '\n' << std::flush;
    std::string ck;
    if (!dir.empty() && opts.checkpoints) {
      ck = checkpoint_name(k);
      write_checkpoint((fs::path(dir) / ck).string(), ens);
    }
    manifest.add_slice(r.t, k, ck);
    if (opts.on_record) opts.on_record(r);
  };

  auto check_bound = [&] {
    const double s = vorticity_sup(ens);
    res.worst_vorticity_sup = std::max(res.worst_vorticity_sup, s);
    if (s > res.vorticity_bound + bound_slack) {
      res.bound_held = false;
      if (cfg.diag.check_bound) {
        throw NumericalError("vorticity bound violated at t = " + csv::num(ens.t) + ": " + csv::num(s) +
                             " > " + csv::num(res.vorticity_bound));
      }
    }
  };

  try {
    check_bound();
    record(0);
    StepStats stats;
    for (long k = 1; k <= n_steps; ++k) {
      ens = advance(ens, dt, params.integrator, opts.workers, &stats);
      ens.t = t0 + static_cast<double>(k) * dt;
      ++res.steps;
      check_bound();
      if (k % cfg.numerics.record_every == 0 || k == n_steps) record(k);
    }
    res.clamp_warnings = stats.clamp_warnings;
  } catch (const NumericalError& e) {
    manifest.set("steps", res.steps);
    manifest.set("error", e.what());
    manifest.finish("aborted");
    throw;
  }
  manifest.set("steps", res.steps);
  manifest.set("clamp_warnings", res.clamp_warnings);
  manifest.set("vorticity_bound", json{{"bound", res.vorticity_bound},
                                       {"worst_sup", res.worst_vorticity_sup},
                                       {"held", res.bound_held}});
  manifest.finish("completed");
  res.final_state = std::move(ens);
  return res;
}

DiagnosticsRecord record_from_checkpoint(const ScenarioConfig& cfg, const std::string& checkpoint_path,
                                         double t, int workers) {
  ScenarioConfig c = cfg;
  c.init.kind = "checkpoint";
  c.init.path = checkpoint_path;
  c.init.t0 = t;
  Ensemble ens = build_ensemble(c);
  const HypothesisReport report = hypothesis_report(ens.profile, kProfileGrid, cfg.profile.c_star);
  return compute_record(ens, build_diagnostics(c, report), workers);
}

std::string format_hypothesis_report(const HypothesisReport& r) {
  std::ostringstream out;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "delta_max=" << csv::num(r.delta_max) << '\n'
      << "m_f=" << csv::num(r.m_f) << '\n'
      << "fpp_sup=" << csv::num(r.fpp_sup) << '\n'
      << "curvature_ratio_h2=" << csv::num(r.curvature_ratio_h2) << '\n'
      << "curvature_ratio_nonstag=" << csv::num(r.curvature_ratio_nonstag) << '\n'
      << "c_star=" << csv::num(r.c_star) << '\n'
      << "h1_ok=" << b(r.h1_ok) << '\n'
      << "h2_ok=" << b(r.h2_ok) << '\n'
      << "nonstagnant=" << b(r.nonstagnant) << '\n'
      << "nonstag_curvature_ok=" << b(r.nonstag_curvature_ok) << '\n';
  return out.str();
}

std::optional<ManifestInfo> read_manifest_for(const std::string& diagnostics_path) {
  const fs::path p = fs::path(diagnostics_path).parent_path() / "manifest.json";
  std::ifstream in(p);
  if (!in) return std::nullopt;
  try {
    const json doc = json::parse(in);
    ManifestInfo info;
    info.m_f = doc.at("resolved").at("m_f").get<double>();
    info.delta = doc.at("resolved").at("delta").get<double>();
    info.preset = doc.value("preset", "");
    return info;
  } catch (const json::exception& e) {
    throw ValidationError("malformed manifest " + p.string() + ": " + e.what());
  }
}

std::string format_prop41(const Prop41Result& r) {
  std::ostringstream out;
  out << "t,dMdt,neg_damping_rhs,tol,margin\n";
  for (const auto& row : r.rows) {
    out << csv::num(row.t) << ',' << csv::num(row.dmdt) << ',' << csv::num(row.rhs) << ','
        << csv::num(row.tol) << ',' << csv::num(row.margin) << '\n';
  }
  out << "worst_margin " << csv::num(r.worst_margin) << '\n' << (r.pass ? "PASS" : "FAIL") << '\n';
  return out.str();
}

std::vector<oracle::OracleCheck> oracle_compare(const ScenarioConfig& cfg, int targets, int workers) {
  const Ensemble ens = build_ensemble(cfg);
  std::vector<oracle::OracleCheck> checks;
  checks.push_back(oracle::compare_fast_direct(ens, targets, cfg.seed, workers));
  if (!ens.blobs.empty()) {
    double y_lo = 1.0, y_hi = 0.0, x_lo = ens.blobs.front().pos.x, x_hi = x_lo;
    for (const auto& b : ens.blobs) {
      x_lo = std::min(x_lo, b.pos.x);
      x_hi = std::max(x_hi, b.pos.x);
      y_lo = std::min(y_lo, b.pos.y);
      y_hi = std::max(y_hi, b.pos.y);
    }
    // Probe cells at spacing 2 eps_blob across the middle of the channel.
    oracle::GridField probe;
    probe.h = 2.0 * ens.reg.eps_blob;
    probe.bounds = {x_lo, x_lo + probe.h * std::max(1.0, std::round((x_hi - x_lo) / probe.h)), 0.25, 0.75};
    const oracle::FieldCheck fc = oracle::field_checks(ens, probe);
    checks.push_back({"divergence_max", fc.div_max, 1e-3, fc.div_max <= 1e-3});
    checks.push_back({"curl_residual", fc.curl_residual, 1e-3, fc.curl_residual <= 1e-3});
  }
  return checks;
}

}  // namespace shearblob
