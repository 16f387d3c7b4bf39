#include "shearblob/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "shearblob/csv.hpp"
#include "shearblob/errors.hpp"

namespace shearblob {

namespace {

constexpr double kPi = std::numbers::pi;

double casimir_generator(CasimirKind kind, double s) {
  switch (kind) {
    case CasimirKind::square:
      return s * s;
    case CasimirKind::quartic:
      return s * s * s * s;
    case CasimirKind::abs:
      return std::abs(s);
  }
  return 0.0;
}

}  // namespace

CasimirKind parse_casimir_kind(const std::string& name) {
  if (name == "square") return CasimirKind::square;
  if (name == "quartic") return CasimirKind::quartic;
  if (name == "abs") return CasimirKind::abs;
  throw ValidationError("unknown Casimir kind '" + name + "' (square, quartic, abs)");
}

std::string to_string(CasimirKind kind) {
  switch (kind) {
    case CasimirKind::square:
      return "square";
    case CasimirKind::quartic:
      return "quartic";
    case CasimirKind::abs:
      return "abs";
  }
  return "?";
}

bool Window::contains(Point p) const {
  return p.x >= x_lo && p.x <= x_hi && wall_distance(p.y) >= d_min;
}

double weighted_mass(const Ensemble& ens) {
  double m = 0.0;
  for (const auto& b : ens.blobs) {
    m += b.area * std::abs(current_vorticity(b, ens.profile)) * std::exp(-kWeightRate * b.pos.x);
  }
  return m;
}

double weighted_sup(const Ensemble& ens, double m_f) {
  double s = 0.0;
  for (const auto& b : ens.blobs) {
    const double phi = std::abs(current_vorticity(b, ens.profile)) *
                       std::exp(-kWeightRate * (b.pos.x - 0.5 * m_f * ens.t));
    s = std::max(s, phi);
  }
  return s;
}

std::pair<double, double> local_norms(const Ensemble& ens, const Window& w) {
  double sup = 0.0, l1 = 0.0;
  for (const auto& b : ens.blobs) {
    if (!w.contains(b.pos)) continue;
    const double om = std::abs(current_vorticity(b, ens.profile));
    sup = std::max(sup, om);
    l1 += b.area * om;
  }
  return {sup, l1};
}

double a_n_functional(const Ensemble& ens, double n) {
  if (!(n > 2.0)) throw ValidationError("A_N needs N > 2");
  const Window w{-n, n, 1.0 / n};
  return local_norms(ens, w).second;
}

double excess_enstrophy(const Ensemble& ens) {
  double e = 0.0;
  for (const auto& b : ens.blobs) {
    const double om = current_vorticity(b, ens.profile);
    e += b.area * (om * om - 2.0 * ens.profile.fp(b.pos.y) * om);
  }
  return e;
}

double excess_casimir(const Ensemble& ens, CasimirSpec spec) {
  if (spec.kind == CasimirKind::square) return excess_enstrophy(ens);
  double c = 0.0;
  for (const auto& b : ens.blobs) {
    const double om = current_vorticity(b, ens.profile);
    const double fp = ens.profile.fp(b.pos.y);
    if (spec.kind == CasimirKind::quartic) {
      // s^4 - r^4 = (s^2 - r^2)(s^2 + r^2) with s = om - fp, r = -fp.
      const double s = om - fp;
      c += b.area * (om * om - 2.0 * fp * om) * (s * s + fp * fp);
    } else {
      c += b.area * (casimir_generator(spec.kind, om - fp) - casimir_generator(spec.kind, -fp));
    }
  }
  return c;
}

double damping_rhs(const Ensemble& ens, double delta) {
  double s = 0.0;
  for (const auto& b : ens.blobs) {
    s += b.area * wall_distance(b.pos.y) * std::abs(current_vorticity(b, ens.profile)) *
         std::exp(-kWeightRate * b.pos.x);
  }
  return 0.25 * kPi * delta * s;
}

double vorticity_sup(const Ensemble& ens) {
  double s = 0.0;
  for (const auto& b : ens.blobs) s = std::max(s, std::abs(current_vorticity(b, ens.profile)));
  return s;
}

double vorticity_sup_bound(const Ensemble& ens) {
  double s = 0.0;
  for (const auto& b : ens.blobs) s = std::max(s, std::abs(b.omega0));
  return ens.profile.sup_abs_fpp() + s;
}

EnergyQuadrature energy_quadrature_for(const Ensemble& ens, double spacing, double tail_tol) {
  if (!(spacing > 0.0) || spacing > 0.5) throw ValidationError("energy spacing must lie in (0, 0.5]");
  double lo = 0.0, hi = 0.0;
  if (!ens.blobs.empty()) {
    lo = hi = ens.blobs.front().pos.x;
    for (const auto& b : ens.blobs) {
      lo = std::min(lo, b.pos.x);
      hi = std::max(hi, b.pos.x);
    }
  }
  const double w = ens.total_abs_weight();
  const double margin = w > 0.0 ? truncation_cutoff(tail_tol, w) : 1.0;
  const double x0 = std::floor((lo - margin) / spacing) * spacing;
  const double x1 = std::ceil((hi + margin) / spacing) * spacing;
  return {{x0, x1, 0.0, 1.0}, spacing};
}

namespace {

double energy_sum(const Ensemble& ens, const Rect& rect, double s, int workers) {
  const auto nx = static_cast<std::size_t>(std::llround((rect.x_hi - rect.x_lo) / s));
  const auto ny = static_cast<std::size_t>(std::llround((rect.y_hi - rect.y_lo) / s));
  std::vector<Point> pts;
  pts.reserve(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      pts.push_back({rect.x_lo + (static_cast<double>(i) + 0.5) * s,
                     rect.y_lo + (static_cast<double>(j) + 0.5) * s});
    }
  }
  std::vector<double> ux(pts.size()), uy(pts.size());
  VelocityField(ens).induced(pts, ux, uy, workers);
  double e = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    e += 2.0 * ens.profile.f(pts[k].y) * ux[k] + ux[k] * ux[k] + uy[k] * uy[k];
  }
  return e * s * s;
}

}  // namespace

EnergyEstimate excess_energy(const Ensemble& ens, const EnergyQuadrature& quad, int workers,
                             bool check_refinement, double tail_tol) {
  EnergyEstimate est;
  if (ens.blobs.empty()) return est;
  const double w = ens.total_abs_weight();
  if (w == 0.0) return est;
  const double margin = truncation_cutoff(tail_tol, w);
  for (const auto& b : ens.blobs) {
    if (b.pos.x - margin < quad.rect.x_lo - 1e-12 || b.pos.x + margin > quad.rect.x_hi + 1e-12) {
      throw ValidationError("energy quadrature grid does not cover the blobs plus the screening margin");
    }
  }
  est.value = energy_sum(ens, quad.rect, quad.spacing, workers);

  // Outside the grid every blob is at least `margin` >= 1 away horizontally,
  // so |u| <= C_env W e^{-pi s} at distance s past either end.
  const double sup_f = std::max(std::abs(ens.profile.sup_f()), 0.0);
  const double c = kEnvelopeConstant * w;
  const double e1 = std::exp(-kPi * margin);
  est.tail_bound = 2.0 * (2.0 * sup_f * c * e1 / kPi + c * c * e1 * e1 / (2.0 * kPi));

  if (check_refinement) {
    const double fine = energy_sum(ens, quad.rect, 0.5 * quad.spacing, workers);
    const double denom = std::abs(fine) > 0.0 ? std::abs(fine) : 1.0;
    est.refinement_change = std::abs(est.value - fine) / denom;
    est.coarse = est.refinement_change > kEnergyCoarseThreshold;
  }
  return est;
}

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series, double t_lo, double t_hi) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : series) {
    if (t < t_lo || t > t_hi) continue;
    if (!(v > 0.0)) {
      throw ValidationError("fit_decay: non-positive value " + csv::num(v) + " at t = " + csv::num(t));
    }
    pts.emplace_back(t, std::log(v));
  }
  if (pts.size() < 10) throw ValidationError("fit_decay: need at least 10 samples in the window");
  const double n = static_cast<double>(pts.size());
  double mt = 0.0, ml = 0.0;
  for (const auto& [t, l] : pts) {
    mt += t;
    ml += l;
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (const auto& [t, l] : pts) {
    stt += (t - mt) * (t - mt);
    stl += (t - mt) * (l - ml);
    sll += (l - ml) * (l - ml);
  }
  if (stt == 0.0) throw ValidationError("fit_decay: samples share a single time");
  const double slope = stl / stt;
  DecayFit fit;
  fit.rate = -slope;
  if (sll == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (const auto& [t, l] : pts) {
      const double r = l - (ml + slope * (t - mt));
      ss_res += r * r;
    }
    fit.r2 = 1.0 - ss_res / sll;
  }
  return fit;
}

DiagnosticsRecord compute_record(const Ensemble& ens, const DiagnosticsConfig& cfg, int workers,
                                 EnergyEstimate* energy) {
  DiagnosticsRecord r;
  r.t = ens.t;
  r.weighted_mass = weighted_mass(ens);
  r.weighted_sup = weighted_sup(ens, cfg.m_f);
  std::tie(r.local_sup, r.local_l1) = local_norms(ens, cfg.window);
  r.a_n = a_n_functional(ens, cfg.n_an);
  r.excess_enstrophy = excess_enstrophy(ens);
  r.excess_casimir = excess_casimir(ens, {cfg.casimir});
  r.damping_rhs = damping_rhs(ens, cfg.delta);
  const EnergyQuadrature quad = energy_quadrature_for(ens, cfg.energy_spacing, cfg.energy_tail_tol);
  const EnergyEstimate e =
      excess_energy(ens, quad, workers, cfg.energy_refinement_check, cfg.energy_tail_tol);
  r.excess_energy = e.value;
  if (energy) *energy = e;
  return r;
}

std::string format_record(const DiagnosticsRecord& r) {
  std::ostringstream out;
  out << csv::num(r.t) << ',' << csv::num(r.weighted_mass) << ',' << csv::num(r.weighted_sup) << ','
      << csv::num(r.local_sup) << ',' << csv::num(r.local_l1) << ',' << csv::num(r.a_n) << ','
      << csv::num(r.excess_enstrophy) << ',' << csv::num(r.excess_energy) << ','
      << csv::num(r.excess_casimir) << ',' << csv::num(r.damping_rhs);
  return out.str();
}

void write_diagnostics(const std::string& path, const std::vector<DiagnosticsRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << kDiagnosticsHeader << '\n';
  for (const auto& r : rows) out << format_record(r) << '\n';
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + " is empty");
  t.header = csv::split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != t.header.size()) throw ValidationError("ragged row in " + path);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::logic_error&) {
        throw ValidationError("non-numeric cell '" + c + "' in " + path);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

std::vector<DiagnosticsRecord> read_diagnostics(const std::string& path) {
  const Table t = read_table(path);
  if (t.header != csv::split(kDiagnosticsHeader)) {
    throw ValidationError(path + " does not have the diagnostics header");
  }
  std::vector<DiagnosticsRecord> out;
  for (const auto& r : t.rows) {
    out.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8], r[9]});
  }
  return out;
}

std::vector<std::pair<double, double>> read_diagnostics_column(const std::string& path,
                                                               const std::string& column) {
  const Table t = read_table(path);
  const auto it = std::find(t.header.begin(), t.header.end(), column);
  if (it == t.header.end()) throw ValidationError("column '" + column + "' not in " + path);
  if (t.header.empty() || t.header.front() != "t") throw ValidationError(path + " has no leading t column");
  const auto k = static_cast<std::size_t>(it - t.header.begin());
  std::vector<std::pair<double, double>> out;
  for (const auto& r : t.rows) out.emplace_back(r[0], r[k]);
  return out;
}

Prop41Result prop41_check(const std::vector<DiagnosticsRecord>& rows, double delta_scale) {
  if (rows.size() < 5) throw ValidationError("prop41 check needs at least 5 recorded slices");
  Prop41Result res;
  res.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double t0 = rows[k - 1].t, t1 = rows[k].t, t2 = rows[k + 1].t;
    const double m0 = rows[k - 1].weighted_mass, m1 = rows[k].weighted_mass, m2 = rows[k + 1].weighted_mass;
    const double hl = t1 - t0, hr = t2 - t1;
    if (!(hl > 0.0) || !(hr > 0.0)) throw ValidationError("prop41 check: times must increase");
    // Three-point derivative and second derivative on a possibly uneven grid.
    const double dmdt = (m2 - m1) / hr * hl / (hl + hr) + (m1 - m0) / hl * hr / (hl + hr);
    const double m2nd = 2.0 * ((m2 - m1) / hr - (m1 - m0) / hl) / (hl + hr);
    const double h = 0.5 * (hl + hr);
    Prop41Row row;
    row.t = t1;
    row.dmdt = dmdt;
    row.rhs = -rows[k].damping_rhs * delta_scale;
    row.tol = 3.0 * std::abs(m2nd) * h * h;
    row.margin = row.rhs + row.tol - row.dmdt;
    res.worst_margin = std::min(res.worst_margin, row.margin);
    if (row.margin < 0.0) res.pass = false;
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace shearblob
