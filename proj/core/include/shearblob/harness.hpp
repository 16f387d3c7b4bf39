#pragma once

// Run orchestration: simulate a scenario into a run directory
// (diagnostics.csv, checkpoints/, manifest.json) and the report helpers
// behind the command-line tool.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shearblob/diagnostics.hpp"
#include "shearblob/reference_oracle.hpp"
#include "shearblob/scenario.hpp"

namespace shearblob {

struct RunOptions {
  std::string out_dir;        // empty: keep everything in memory
  int workers = 1;
  bool checkpoints = true;
  std::function<void(const DiagnosticsRecord&)> on_record;
};

struct RunResult {
  std::vector<DiagnosticsRecord> rows;
  std::optional<Ensemble> final_state;
  HypothesisReport report;
  DiagnosticsConfig diag;
  EnergyEstimate first_energy;
  long steps = 0;
  long clamp_warnings = 0;
  double vorticity_bound = 0.0;       // sup|f''| + max|omega0|
  double worst_vorticity_sup = 0.0;   // max over steps of max_j |omega_j|
  bool bound_held = true;
};

inline constexpr int kProfileGrid = 2048;

// Runs cfg from its initial data to numerics.t_end. A NumericalError
// (blow-up, wall crossing, violated vorticity bound) is rethrown after the
// rows so far, the last checkpoint and a manifest marked "aborted" are written.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

// Diagnostics of the ensemble stored in a checkpoint, using cfg for the
// profile, numerics and diagnostics settings.
DiagnosticsRecord record_from_checkpoint(const ScenarioConfig& cfg, const std::string& checkpoint_path,
                                         double t, int workers = 1);

std::string format_hypothesis_report(const HypothesisReport& r);

// Reads "<dir>/manifest.json" next to a diagnostics file; nullopt if absent.
struct ManifestInfo {
  double m_f = 0.0;
  double delta = 0.0;
  std::string preset;
};
std::optional<ManifestInfo> read_manifest_for(const std::string& diagnostics_path);

std::string format_prop41(const Prop41Result& r);

// Kernel invariants plus the fast/direct comparison used by oracle-compare.
std::vector<oracle::OracleCheck> oracle_compare(const ScenarioConfig& cfg, int targets, int workers);

}  // namespace shearblob
