#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shearblob/vortex_dynamics.hpp"

namespace shearblob {

// Exponential weight e^{-a x} used by every weighted functional.
inline constexpr double kWeightRate = 1.5707963267948966;  // pi / 2

struct DiagnosticsRecord {
  double t = 0.0;
  double weighted_mass = 0.0;     // M = sum a |w| e^{-a x}
  double weighted_sup = 0.0;      // max |w| e^{-a (x - m_f t / 2)}
  double local_sup = 0.0;
  double local_l1 = 0.0;
  double a_n = 0.0;
  double excess_enstrophy = 0.0;
  double excess_energy = 0.0;
  double excess_casimir = 0.0;
  double damping_rhs = 0.0;       // (pi delta / 4) sum a d(y) |w| e^{-a x}
};

enum class CasimirKind { square, quartic, abs };

struct CasimirSpec {
  CasimirKind kind = CasimirKind::square;
};

CasimirKind parse_casimir_kind(const std::string& name);
std::string to_string(CasimirKind kind);

// {x_lo <= x <= x_hi, d(y) >= d_min}.
struct Window {
  double x_lo = -1.0, x_hi = 1.0;
  double d_min = 0.0;

  bool contains(Point p) const;
};

double weighted_mass(const Ensemble& ens);
double weighted_sup(const Ensemble& ens, double m_f);
// (local_sup, local_l1)
std::pair<double, double> local_norms(const Ensemble& ens, const Window& w);
double a_n_functional(const Ensemble& ens, double n);
double excess_enstrophy(const Ensemble& ens);
double excess_casimir(const Ensemble& ens, CasimirSpec spec);
double damping_rhs(const Ensemble& ens, double delta);

// max_j |omega_j| and the a priori bound sup|f''| + max_j |omega0_j|.
double vorticity_sup(const Ensemble& ens);
double vorticity_sup_bound(const Ensemble& ens);

// Midpoint-rule grid for the excess energy.
struct EnergyQuadrature {
  Rect rect;
  double spacing = 0.05;
};

// Covers [min x - L, max x + L] x [0,1] with L = truncation_cutoff(tail_tol, W_abs),
// x-extent rounded to whole cells.
EnergyQuadrature energy_quadrature_for(const Ensemble& ens, double spacing, double tail_tol);

struct EnergyEstimate {
  double value = 0.0;
  double tail_bound = 0.0;          // bound on the integrand outside the grid
  double refinement_change = 0.0;   // |E(h) - E(h/2)| / |E(h/2)|, when checked
  bool coarse = false;              // refinement_change > 5%
};

inline constexpr double kEnergyCoarseThreshold = 0.05;

// Integral of 2 f(y) u^x + |u|^2. Throws ValidationError when the grid does
// not cover the blobs plus the screening margin.
EnergyEstimate excess_energy(const Ensemble& ens, const EnergyQuadrature& quad, int workers = 1,
                             bool check_refinement = false, double tail_tol = 1e-8);

struct DecayFit {
  double rate = 0.0;  // -slope of ln(value) against t
  double r2 = 0.0;
};

// Least-squares fit of ln(value) vs t over samples with t in [t_lo, t_hi].
// Needs >= 10 samples, all positive.
DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series,
                        double t_lo = -1e300, double t_hi = 1e300);

struct DiagnosticsConfig {
  Window window;
  double n_an = 5.0;
  CasimirKind casimir = CasimirKind::quartic;
  double energy_spacing = 0.05;
  double energy_tail_tol = 1e-8;
  bool energy_refinement_check = false;
  double m_f = 0.0;
  double delta = 1.0;
};

DiagnosticsRecord compute_record(const Ensemble& ens, const DiagnosticsConfig& cfg, int workers = 1,
                                 EnergyEstimate* energy = nullptr);

inline const char* kDiagnosticsHeader =
    "t,M,sup_phi,local_sup,local_l1,a_n,excess_enstrophy,excess_energy,excess_casimir,damping_rhs";

std::string format_record(const DiagnosticsRecord& r);
void write_diagnostics(const std::string& path, const std::vector<DiagnosticsRecord>& rows);
std::vector<DiagnosticsRecord> read_diagnostics(const std::string& path);
// (t, column) pairs for any column named in the header.
std::vector<std::pair<double, double>> read_diagnostics_column(const std::string& path,
                                                               const std::string& column);

struct Prop41Row {
  double t = 0.0;
  double dmdt = 0.0;     // centred difference of M
  double rhs = 0.0;      // -damping_rhs
  double tol = 0.0;      // 3 |M''| dt^2
  double margin = 0.0;   // rhs + tol - dmdt; >= 0 passes
};

struct Prop41Result {
  bool pass = true;
  double worst_margin = 0.0;
  std::vector<Prop41Row> rows;
};

// dM/dt <= -damping_rhs * delta_scale + tol at every interior slice.
Prop41Result prop41_check(const std::vector<DiagnosticsRecord>& rows, double delta_scale = 1.0);

}  // namespace shearblob
