#pragma once

// Scenario configuration: flat key=value text with profile., init.,
// numerics. and diag. prefixes, plus the built-in presets.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shearblob/diagnostics.hpp"
#include "shearblob/vortex_dynamics.hpp"

namespace shearblob {

struct ProfileSpec {
  std::string kind = "couette";  // couette | constant | sine-perturbed | table
  double value = 1.0;            // constant
  double amp = 0.05;             // sine-perturbed
  std::string path;              // table
  double c_star = kDefaultCStar;
};

struct InitSpec {
  std::string kind = "patch";    // patch | bump | dipole | checkpoint
  double amplitude = 0.1;
  Rect box{-1.0, 1.0, 0.25, 0.75};
  double gap = 0.1;              // dipole: empty band between the two halves
  double passive_margin = 0.0;
  std::string path;              // checkpoint
  double t0 = 0.0;               // checkpoint
};

struct NumericsSpec {
  double h = 0.05;
  double eps_blob = 0.05;
  double dt = 0.01;
  double t_end = 10.0;
  double tol = 1e-10;
  int record_every = 10;
  Integrator integrator = Integrator::rk4;
};

struct DiagSpec {
  Window window{-3.0, 3.0, 0.1};
  double n_an = 5.0;
  CasimirKind casimir = CasimirKind::quartic;
  double energy_spacing = 0.05;
  double energy_tail_tol = 1e-8;
  double delta = 0.0;            // 0: use the profile's largest (H1) delta
  double m_f = -1.0;             // < 0: use inf f
  bool check_bound = true;       // assert the vorticity bound every step
};

struct ScenarioConfig {
  std::string name = "custom";
  ProfileSpec profile;
  InitSpec init;
  NumericsSpec numerics;
  DiagSpec diag;
  std::uint64_t seed = 0;
  std::string output_dir;
};

// Applies one key=value assignment; ValidationError on unknown keys or
// malformed values.
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);
// Parses key=value lines ('#' starts a comment) on top of `base`.
ScenarioConfig parse_config(const std::string& text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {});

// Every key with its current value, in a fixed order; parse_config of the
// joined lines reproduces the config.
std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& cfg);
std::string format_config(const ScenarioConfig& cfg);

std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

ShearProfile build_profile(const ProfileSpec& spec);
Sampler build_sampler(const InitSpec& spec);
Ensemble build_ensemble(const ScenarioConfig& cfg);
// Diagnostics settings with delta and m_f resolved against the profile.
DiagnosticsConfig build_diagnostics(const ScenarioConfig& cfg, const HypothesisReport& report);

}  // namespace shearblob
