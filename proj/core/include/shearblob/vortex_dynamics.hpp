#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shearblob/channel_kernel.hpp"
#include "shearblob/shear_profile.hpp"

namespace shearblob {

struct Rect {
  double x_lo = 0.0, x_hi = 0.0;
  double y_lo = 0.0, y_hi = 1.0;

  bool contains(Point p) const { return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi; }
};

// Lagrangian carrier of the perturbation. Total vorticity -f' + omega is
// constant along the trajectory, so only the seed values are stored.
struct VortexBlob {
  Point pos;
  double area = 0.0;
  double omega0 = 0.0;   // perturbation vorticity at the seed point
  double fprime0 = 0.0;  // f'(y) at the seed point
};

// omega0 - fprime0 + f'(y): the perturbation vorticity a blob carries now.
double current_vorticity(const VortexBlob& blob, const ShearProfile& profile);

struct Ensemble {
  std::vector<VortexBlob> blobs;
  double t = 0.0;
  ShearProfile profile;
  RegularizationParams reg;
  TruncationPolicy trunc;

  Ensemble(std::vector<VortexBlob> b, ShearProfile p, RegularizationParams r, double tol);

  // sum_j area_j |omega_j| at the current positions.
  double total_abs_weight() const;
  // Recomputes trunc.l_cut from trunc.tol and the current weight.
  void refresh_cutoff();
};

enum class Integrator { rk4, euler };

struct SimParams {
  double dt = 0.01;
  double t_end = 1.0;
  Integrator integrator = Integrator::rk4;
  int record_every = 10;  // steps between recorded slices
};

Integrator parse_integrator(const std::string& name);

using Sampler = std::function<double(Point)>;

// Seeds one blob per cell centre of a uniform grid of spacing h over bbox;
// area h^2, omega0 = sampler(centre). Cells where the sampler vanishes are
// dropped, except inside a passive margin: with passive_margin > 0 the grid
// covers [x_lo - m, x_hi + m] x [0,1] (rows aligned to y = 0) and keeps every
// cell, so fluid displaced across a curved profile can pick up vorticity.
Ensemble discretize_initial(const Sampler& sampler, const Rect& bbox, double h,
                            const ShearProfile& profile, RegularizationParams reg, double tol,
                            double passive_margin = 0.0);

// Screened, regularized Biot-Savart sum over a fixed ensemble snapshot.
// Sources are sorted by x so the |x - x_j| <= l_cut window is two binary
// searches; each target sums its window in a fixed order.
class VelocityField {
 public:
  explicit VelocityField(const Ensemble& ens);
  // Sources at explicit positions (used for intermediate integrator stages).
  VelocityField(const Ensemble& ens, std::span<const Point> positions);

  std::pair<double, double> induced(Point z) const;
  void induced(std::span<const Point> targets, std::span<double> ux, std::span<double> uy,
               int workers) const;

  double l_cut() const { return l_cut_; }
  std::size_t size() const { return x_.size(); }

 private:
  void build(const Ensemble& ens, std::span<const Point> positions);
  std::pair<double, double> sum_window(Point z) const;

  double shift_ = 0.0;
  double l_cut_ = 0.0;
  double x_ref_ = 0.0;
  std::vector<double> x_, w_, ex_, iex_, sh_, ch_, s1_;
};

std::pair<double, double> induced_velocity(const Ensemble& ens, Point z);
std::pair<double, double> total_velocity(const Ensemble& ens, Point z);

struct StepStats {
  long clamp_warnings = 0;
  double max_speed = 0.0;  // largest |u| seen during the step
};

inline constexpr double kWallClampTolerance = 1e-10;

// One step of the chosen integrator; dt may be negative (backward in time).
Ensemble advance(const Ensemble& ens, double dt, Integrator integrator, int workers = 1,
                 StepStats* stats = nullptr);
// advance() with params.dt, which must be positive.
Ensemble step(const Ensemble& ens, const SimParams& params, int workers = 1,
              StepStats* stats = nullptr);

// sup f + max |u| over blob positions: the advective speed scale.
double velocity_scale(const Ensemble& ens, int workers = 1);
// dt <= 0.5 eps_blob / velocity_scale; throws ValidationError otherwise.
void check_time_step(const Ensemble& ens, const SimParams& params, int workers = 1);

// Checkpoint CSV: header x,y,area,omega0,fprime0, 17 significant digits.
void write_checkpoint(const std::string& path, const Ensemble& ens);
std::vector<VortexBlob> read_checkpoint(const std::string& path);

}  // namespace shearblob
