#include "shearblob/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "shearblob/errors.hpp"

namespace shearblob {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ValidationError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ValidationError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(key + ": expected true or false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ValidationError(key + " must be positive");
  return v;
}

struct Field {
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <typename Getter>
Field real(Getter g, bool must_be_positive = false, const char* name = "") {
  return {[g, must_be_positive, name](ScenarioConfig& c, const std::string& v) {
            const double x = to_double(name, v);
            g(c) = must_be_positive ? positive(name, x) : x;
          },
          [g](const ScenarioConfig& c) { return shortest(g(c)); }};
}

template <typename Getter>
Field text(Getter g) {
  return {[g](ScenarioConfig& c, const std::string& v) { g(c) = v; },
          [g](const ScenarioConfig& c) { return g(c); }};
}

// Ordered so that config_entries and format_config are stable.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.push_back({"name", text([](auto& c) -> auto& { return c.name; })});
    t.push_back({"seed",
                 {[](ScenarioConfig& c, const std::string& v) {
                    const long s = to_long("seed", v);
                    if (s < 0) throw ValidationError("seed must be non-negative");
                    c.seed = static_cast<std::uint64_t>(s);
                  },
                  [](const ScenarioConfig& c) { return std::to_string(c.seed); }}});
    t.push_back({"output.dir", text([](auto& c) -> auto& { return c.output_dir; })});

    t.push_back({"profile.kind", {[](ScenarioConfig& c, const std::string& v) {
                                    if (v != "couette" && v != "constant" && v != "sine-perturbed" && v != "table") {
                                      throw ValidationError("profile.kind must be couette, constant, sine-perturbed or table");
                                    }
                                    c.profile.kind = v;
                                  },
                                  [](const ScenarioConfig& c) { return c.profile.kind; }}});
    t.push_back({"profile.value", real([](auto& c) -> auto& { return c.profile.value; }, false,
                                       "profile.value")});
    t.push_back({"profile.amp",
                 real([](auto& c) -> auto& { return c.profile.amp; }, false, "profile.amp")});
    t.push_back({"profile.path", text([](auto& c) -> auto& { return c.profile.path; })});
    t.push_back({"profile.c_star", real([](auto& c) -> auto& { return c.profile.c_star; }, true,
                                        "profile.c_star")});

    t.push_back({"init.kind", {[](ScenarioConfig& c, const std::string& v) {
                                 if (v != "patch" && v != "bump" && v != "dipole" && v != "checkpoint") {
                                   throw ValidationError("init.kind must be patch, bump, dipole or checkpoint");
                                 }
                                 c.init.kind = v;
                               },
                               [](const ScenarioConfig& c) { return c.init.kind; }}});
    t.push_back({"init.amplitude", real([](auto& c) -> auto& { return c.init.amplitude; }, false,
                                        "init.amplitude")});
    t.push_back({"init.x_lo", real([](auto& c) -> auto& { return c.init.box.x_lo; }, false, "init.x_lo")});
    t.push_back({"init.x_hi", real([](auto& c) -> auto& { return c.init.box.x_hi; }, false, "init.x_hi")});
    t.push_back({"init.y_lo", real([](auto& c) -> auto& { return c.init.box.y_lo; }, false, "init.y_lo")});
    t.push_back({"init.y_hi", real([](auto& c) -> auto& { return c.init.box.y_hi; }, false, "init.y_hi")});
    t.push_back({"init.gap", real([](auto& c) -> auto& { return c.init.gap; }, false, "init.gap")});
    t.push_back({"init.passive_margin", real([](auto& c) -> auto& { return c.init.passive_margin; },
                                             false, "init.passive_margin")});
    t.push_back({"init.path", text([](auto& c) -> auto& { return c.init.path; })});
    t.push_back({"init.t0", real([](auto& c) -> auto& { return c.init.t0; }, false, "init.t0")});

    t.push_back({"numerics.h", real([](auto& c) -> auto& { return c.numerics.h; }, true, "numerics.h")});
    t.push_back({"numerics.eps_blob", real([](auto& c) -> auto& { return c.numerics.eps_blob; }, true,
                                           "numerics.eps_blob")});
    t.push_back({"numerics.dt", real([](auto& c) -> auto& { return c.numerics.dt; }, true, "numerics.dt")});
    t.push_back({"numerics.t_end", real([](auto& c) -> auto& { return c.numerics.t_end; }, false,
                                        "numerics.t_end")});
    t.push_back({"numerics.tol", real([](auto& c) -> auto& { return c.numerics.tol; }, true,
                                      "numerics.tol")});
    t.push_back({"numerics.record_every", {[](ScenarioConfig& c, const std::string& v) {
                                             const long n = to_long("numerics.record_every", v);
                                             if (n < 1) throw ValidationError("numerics.record_every must be >= 1");
                                             c.numerics.record_every = static_cast<int>(n);
                                           },
                                           [](const ScenarioConfig& c) {
                                             return std::to_string(c.numerics.record_every);
                                           }}});
    t.push_back({"numerics.integrator",
                 {[](ScenarioConfig& c, const std::string& v) { c.numerics.integrator = parse_integrator(v); },
                  [](const ScenarioConfig& c) {
                    return std::string(c.numerics.integrator == Integrator::rk4 ? "rk4" : "euler");
                  }}});

    t.push_back({"diag.x_lo", real([](auto& c) -> auto& { return c.diag.window.x_lo; }, false, "diag.x_lo")});
    t.push_back({"diag.x_hi", real([](auto& c) -> auto& { return c.diag.window.x_hi; }, false, "diag.x_hi")});
    t.push_back({"diag.d_min", real([](auto& c) -> auto& { return c.diag.window.d_min; }, false,
                                    "diag.d_min")});
    t.push_back({"diag.n_an", real([](auto& c) -> auto& { return c.diag.n_an; }, false, "diag.n_an")});
    t.push_back({"diag.casimir",
                 {[](ScenarioConfig& c, const std::string& v) { c.diag.casimir = parse_casimir_kind(v); },
                  [](const ScenarioConfig& c) { return to_string(c.diag.casimir); }}});
    t.push_back({"diag.energy_spacing", real([](auto& c) -> auto& { return c.diag.energy_spacing; },
                                             true, "diag.energy_spacing")});
    t.push_back({"diag.energy_tail_tol", real([](auto& c) -> auto& { return c.diag.energy_tail_tol; },
                                              true, "diag.energy_tail_tol")});
    t.push_back({"diag.delta", real([](auto& c) -> auto& { return c.diag.delta; }, false, "diag.delta")});
    t.push_back({"diag.m_f", real([](auto& c) -> auto& { return c.diag.m_f; }, false, "diag.m_f")});
    t.push_back({"diag.check_bound",
                 {[](ScenarioConfig& c, const std::string& v) { c.diag.check_bound = to_bool("diag.check_bound", v); },
                  [](const ScenarioConfig& c) { return std::string(c.diag.check_bound ? "true" : "false"); }}});
    return t;
  }();
  return table;
}

void validate(const ScenarioConfig& c) {
  if (!(c.numerics.t_end >= 0.0)) throw ValidationError("numerics.t_end must be non-negative");
  if (!(c.numerics.eps_blob < 0.5)) throw ValidationError("numerics.eps_blob must be below 0.5");
  if (!(c.diag.window.x_lo < c.diag.window.x_hi)) throw ValidationError("diag.x_lo must be below diag.x_hi");
  if (!(c.diag.window.d_min >= 0.0 && c.diag.window.d_min < 0.5)) {
    throw ValidationError("diag.d_min must lie in [0, 1/2)");
  }
  if (!(c.diag.n_an > 2.0)) throw ValidationError("diag.n_an must exceed 2");
  if (c.diag.delta < 0.0) throw ValidationError("diag.delta must be non-negative");
  if (c.init.passive_margin < 0.0) throw ValidationError("init.passive_margin must be non-negative");
  if (c.init.kind != "checkpoint") {
    const Rect& b = c.init.box;
    if (!(b.x_lo < b.x_hi && b.y_lo < b.y_hi && b.y_lo >= 0.0 && b.y_hi <= 1.0)) {
      throw ValidationError("init box must be a non-empty rectangle inside the channel");
    }
  }
  if (c.init.kind == "dipole" && !(c.init.gap >= 0.0 && c.init.gap < c.init.box.y_hi - c.init.box.y_lo)) {
    throw ValidationError("init.gap must be non-negative and narrower than the box");
  }
}

}  // namespace

void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [k, f] : fields()) {
    if (k == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ValidationError("unknown config key '" + key + "'");
}

ScenarioConfig parse_config(const std::string& text, ScenarioConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate(base);
  return base;
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, f] : fields()) out.emplace_back(k, f.get(cfg));
  return out;
}

std::string format_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::string> preset_names() {
  return {"couette-patch", "nonstagnant-const", "nonstagnant-sine", "boundary-touching", "dipole"};
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "couette-patch") {
    c.profile.kind = "couette";
    c.numerics.t_end = 20.0;
  } else if (name == "nonstagnant-const") {
    c.profile.kind = "constant";
    c.profile.value = 1.0;
    c.diag.window = {-5.0, 5.0, 0.0};
  } else if (name == "nonstagnant-sine") {
    c.profile.kind = "sine-perturbed";
    c.profile.amp = 0.05;
    c.diag.window = {-5.0, 5.0, 0.0};
    // Fluid swept across the curved profile picks up vorticity, so the
    // neighbourhood of the patch is seeded with zero-vorticity carriers.
    c.init.passive_margin = 2.0;
  } else if (name == "boundary-touching") {
    c.profile.kind = "couette";
    c.init.box = {1.0, 3.0, 0.0, 0.5};
    c.numerics.t_end = 20.0;
  } else if (name == "dipole") {
    c.profile.kind = "constant";
    c.profile.value = 0.0;
    c.init.kind = "dipole";
    c.init.amplitude = 1.0;
    c.init.box = {-0.5, 0.5, 0.15, 0.85};
    c.init.gap = 0.1;
    c.numerics.t_end = 5.0;
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("unknown preset '" + name + "' (" + known + ")");
  }
  return c;
}

ShearProfile build_profile(const ProfileSpec& spec) {
  if (spec.kind == "couette") return ShearProfile::couette();
  if (spec.kind == "constant") return ShearProfile::constant(spec.value);
  if (spec.kind == "sine-perturbed") return ShearProfile::sine_perturbed(spec.amp);
  if (spec.kind == "table") {
    if (spec.path.empty()) throw ValidationError("profile.kind = table needs profile.path");
    return ShearProfile::from_csv(spec.path);
  }
  throw ValidationError("unknown profile kind '" + spec.kind + "'");
}

Sampler build_sampler(const InitSpec& spec) {
  const Rect box = spec.box;
  const double amp = spec.amplitude;
  if (spec.kind == "patch") {
    return [box, amp](Point p) { return box.contains(p) ? amp : 0.0; };
  }
  if (spec.kind == "bump") {
    // cos^2 bump in each direction, peak amp at the box centre.
    return [box, amp](Point p) {
      if (!box.contains(p)) return 0.0;
      const double sx = (2.0 * p.x - box.x_lo - box.x_hi) / (box.x_hi - box.x_lo);
      const double sy = (2.0 * p.y - box.y_lo - box.y_hi) / (box.y_hi - box.y_lo);
      const double cx = std::cos(0.5 * std::numbers::pi * sx);
      const double cy = std::cos(0.5 * std::numbers::pi * sy);
      return amp * cx * cx * cy * cy;
    };
  }
  if (spec.kind == "dipole") {
    const double mid = 0.5 * (box.y_lo + box.y_hi);
    const double half_gap = 0.5 * spec.gap;
    return [box, amp, mid, half_gap](Point p) {
      if (!box.contains(p)) return 0.0;
      if (p.y >= mid + half_gap) return amp;
      if (p.y <= mid - half_gap) return -amp;
      return 0.0;
    };
  }
  throw ValidationError("init.kind '" + spec.kind + "' has no sampler");
}

Ensemble build_ensemble(const ScenarioConfig& cfg) {
  const ShearProfile profile = build_profile(cfg.profile);
  const RegularizationParams reg{cfg.numerics.eps_blob};
  if (cfg.init.kind == "checkpoint") {
    if (cfg.init.path.empty()) throw ValidationError("init.kind = checkpoint needs init.path");
    Ensemble ens(read_checkpoint(cfg.init.path), profile, reg, cfg.numerics.tol);
    ens.t = cfg.init.t0;
    return ens;
  }
  if (cfg.init.amplitude == 0.0 && cfg.init.passive_margin == 0.0) {
    return Ensemble({}, profile, reg, cfg.numerics.tol);
  }
  return discretize_initial(build_sampler(cfg.init), cfg.init.box, cfg.numerics.h, profile, reg,
                            cfg.numerics.tol, cfg.init.passive_margin);
}

DiagnosticsConfig build_diagnostics(const ScenarioConfig& cfg, const HypothesisReport& report) {
  DiagnosticsConfig d;
  d.window = cfg.diag.window;
  d.n_an = cfg.diag.n_an;
  d.casimir = cfg.diag.casimir;
  d.energy_spacing = cfg.diag.energy_spacing;
  d.energy_tail_tol = cfg.diag.energy_tail_tol;
  d.m_f = cfg.diag.m_f >= 0.0 ? cfg.diag.m_f : std::max(report.m_f, 0.0);
  d.delta = cfg.diag.delta > 0.0 ? cfg.diag.delta : report.delta_max;
  return d;
}

}  // namespace shearblob
