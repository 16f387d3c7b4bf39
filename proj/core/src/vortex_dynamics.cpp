#include "shearblob/vortex_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <experimental/simd>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "shearblob/csv.hpp"
#include "shearblob/errors.hpp"
#include "shearblob/parallel.hpp"

namespace shearblob {

namespace {

constexpr double kPi = std::numbers::pi;
namespace stdx = std::experimental;
// Keeps e^{pi (x - x_ref)/2} comfortably inside double range.
constexpr double kMaxSourceSpan = 400.0;

void validate_blob(const VortexBlob& b) {
  if (!(b.pos.y >= 0.0 && b.pos.y <= 1.0) || !std::isfinite(b.pos.x)) {
    throw ValidationError("blob outside the channel");
  }
  if (!(b.area > 0.0)) throw ValidationError("blob area must be positive");
  if (!std::isfinite(b.omega0) || !std::isfinite(b.fprime0)) {
    throw ValidationError("blob vorticity must be finite");
  }
}

double clamp_to_channel(double y, long& warnings) {
  if (y >= 0.0 && y <= 1.0) return y;
  const double overshoot = y < 0.0 ? -y : y - 1.0;
  if (!(overshoot <= kWallClampTolerance)) {
    std::ostringstream msg;
    msg << "blob crossed a wall (y = " << csv::num(y) << ")";
    throw NumericalError(msg.str());
  }
  ++warnings;
  return y < 0.0 ? 0.0 : 1.0;
}

struct TargetTrig {
  double ex, iex, sh, ch, s1;
};

// Same formulas as biot_savart_kernel, with per-source half-angle values
// combined by angle addition so the pair loop has no transcendentals and a
// single division. Sources are folded into kLanes partial sums by index, then
// the lanes are added in order: a fixed summation order for a given window.
constexpr std::size_t kLanes = 8;

template <class T>
inline void pair_term(const TargetTrig& t, double c, T ex, T iex, T sh, T ch, T s1, T w, T& ax, T& ay) {
  const T q = t.ex * iex;
  const T iq = t.iex * ex;
  const T shx = 0.5 * (q - iq);
  const T chx = 0.5 * (q + iq);
  const T sm = t.sh * ch - t.ch * sh;
  const T sp = t.sh * ch + t.ch * sh;
  const T cm = t.ch * ch + t.sh * sh;
  const T cp = t.ch * ch - t.sh * sh;
  const T base = 2.0 * shx * shx;
  const T am = base + 2.0 * sm * sm + c;
  const T ap = base + 2.0 * sp * sp + c;
  const T inv = w / (am * ap);
  ax += 0.5 * (sp * cp * am - sm * cm * ap) * inv;
  ay += shx * chx * t.s1 * s1 * inv;
}

std::pair<double, double> window_sum(const TargetTrig& t, double c, std::size_t m,
                                     const double* ex, const double* iex, const double* sh,
                                     const double* ch, const double* s1, const double* w) {
  using V = stdx::fixed_size_simd<double, kLanes>;
  constexpr auto tag = stdx::element_aligned;
  V ax = 0.0, ay = 0.0;
  std::size_t j = 0;
  for (; j + kLanes <= m; j += kLanes) {
    pair_term(t, c, V(ex + j, tag), V(iex + j, tag), V(sh + j, tag), V(ch + j, tag), V(s1 + j, tag),
              V(w + j, tag), ax, ay);
  }
  double lx[kLanes], ly[kLanes];
  ax.copy_to(lx, tag);
  ay.copy_to(ly, tag);
  for (std::size_t k = 0; j < m; ++j, ++k) {
    pair_term(t, c, ex[j], iex[j], sh[j], ch[j], s1[j], w[j], lx[k], ly[k]);
  }
  double ux = 0.0, uy = 0.0;
  for (std::size_t k = 0; k < kLanes; ++k) {
    ux += lx[k];
    uy += ly[k];
  }
  return {ux, uy};
}

}  // namespace

double current_vorticity(const VortexBlob& blob, const ShearProfile& profile) {
  return blob.omega0 - blob.fprime0 + profile.fp(blob.pos.y);
}

Ensemble::Ensemble(std::vector<VortexBlob> b, ShearProfile p, RegularizationParams r, double tol)
    : blobs(std::move(b)), profile(std::move(p)), reg(r), trunc{1.0, tol} {
  if (!(reg.eps_blob > 0.0 && reg.eps_blob < 0.5)) {
    throw ValidationError("eps_blob must lie in (0, 0.5)");
  }
  if (!(tol > 0.0)) throw ValidationError("truncation tolerance must be positive");
  for (const auto& blob : blobs) validate_blob(blob);
  refresh_cutoff();
}

double Ensemble::total_abs_weight() const {
  double w = 0.0;
  for (const auto& b : blobs) w += b.area * std::abs(current_vorticity(b, profile));
  return w;
}

void Ensemble::refresh_cutoff() {
  const double w = total_abs_weight();
  trunc.l_cut = w > 0.0 ? truncation_cutoff(trunc.tol, w) : 1.0;
}

Integrator parse_integrator(const std::string& name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "euler") return Integrator::euler;
  throw ValidationError("unknown integrator '" + name + "' (expected rk4 or euler)");
}

Ensemble discretize_initial(const Sampler& sampler, const Rect& bbox, double h,
                            const ShearProfile& profile, RegularizationParams reg, double tol,
                            double passive_margin) {
  if (!(h > 0.0)) throw ValidationError("grid spacing h must be positive");
  if (!(bbox.x_lo < bbox.x_hi) || !(bbox.y_lo < bbox.y_hi) || bbox.y_lo < 0.0 || bbox.y_hi > 1.0) {
    throw ValidationError("initial bounding box must be a non-empty rectangle inside the channel");
  }
  if (!(passive_margin >= 0.0)) throw ValidationError("passive margin must be non-negative");

  const bool passive = passive_margin > 0.0;
  const double x0 = bbox.x_lo - passive_margin;
  const double x1 = bbox.x_hi + passive_margin;
  const double y0 = passive ? 0.0 : bbox.y_lo;
  const double y1 = passive ? 1.0 : bbox.y_hi;
  const auto nx = static_cast<long>(std::llround((x1 - x0) / h));
  const auto ny = static_cast<long>(std::llround((y1 - y0) / h));
  if (nx <= 0 || ny <= 0) throw ValidationError("grid spacing larger than the bounding box");

  std::vector<VortexBlob> blobs;
  for (long i = 0; i < nx; ++i) {
    const double x = x0 + (static_cast<double>(i) + 0.5) * h;
    for (long j = 0; j < ny; ++j) {
      const double y = y0 + (static_cast<double>(j) + 0.5) * h;
      if (y > 1.0) continue;
      const Point c{x, y};
      const double w = bbox.contains(c) ? sampler(c) : 0.0;
      if (w == 0.0 && !passive) continue;
      blobs.push_back({c, h * h, w, profile.fp(y)});
    }
  }
  const bool any = std::any_of(blobs.begin(), blobs.end(), [](const VortexBlob& b) { return b.omega0 != 0.0; });
  if (!any) throw ValidationError("initial vorticity vanishes on the seeding grid");
  return Ensemble(std::move(blobs), profile, reg, tol);
}

VelocityField::VelocityField(const Ensemble& ens) {
  std::vector<Point> pos;
  pos.reserve(ens.blobs.size());
  for (const auto& b : ens.blobs) pos.push_back(b.pos);
  build(ens, pos);
}

VelocityField::VelocityField(const Ensemble& ens, std::span<const Point> positions) {
  build(ens, positions);
}

void VelocityField::build(const Ensemble& ens, std::span<const Point> positions) {
  const std::size_t n = positions.size();
  shift_ = ens.reg.denominator_shift();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return positions[a].x < positions[b].x; });

  x_.resize(n);
  w_.resize(n);
  double abs_weight = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    VortexBlob b = ens.blobs[j];
    b.pos = positions[j];
    x_[k] = b.pos.x;
    w_[k] = b.area * current_vorticity(b, ens.profile);
    abs_weight += std::abs(w_[k]);
  }
  l_cut_ = abs_weight > 0.0 ? truncation_cutoff(ens.trunc.tol, abs_weight) : 1.0;
  x_ref_ = n > 0 ? x_[n / 2] : 0.0;
  if (n > 0 && (x_.back() - x_ref_ > kMaxSourceSpan || x_ref_ - x_.front() > kMaxSourceSpan)) {
    throw NumericalError("ensemble spans too far horizontally for the fast kernel");
  }

  ex_.resize(n);
  iex_.resize(n);
  sh_.resize(n);
  ch_.resize(n);
  s1_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double y = positions[order[k]].y;
    ex_[k] = std::exp(0.5 * kPi * (x_[k] - x_ref_));
    iex_[k] = std::exp(-0.5 * kPi * (x_[k] - x_ref_));
    sh_[k] = std::sin(0.5 * kPi * y);
    ch_[k] = std::cos(0.5 * kPi * y);
    s1_[k] = sin_pi_channel(y);
  }
}

std::pair<double, double> VelocityField::sum_window(Point z) const {
  const auto lo = static_cast<std::size_t>(
      std::lower_bound(x_.begin(), x_.end(), z.x - l_cut_) - x_.begin());
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(x_.begin(), x_.end(), z.x + l_cut_) - x_.begin());
  if (lo >= hi) return {0.0, 0.0};
  const TargetTrig t{std::exp(0.5 * kPi * (z.x - x_ref_)), std::exp(-0.5 * kPi * (z.x - x_ref_)),
                    std::sin(0.5 * kPi * z.y), std::cos(0.5 * kPi * z.y), sin_pi_channel(z.y)};
  return window_sum(t, shift_, hi - lo, ex_.data() + lo, iex_.data() + lo, sh_.data() + lo,
                    ch_.data() + lo, s1_.data() + lo, w_.data() + lo);
}

std::pair<double, double> VelocityField::induced(Point z) const { return sum_window(z); }

void VelocityField::induced(std::span<const Point> targets, std::span<double> ux,
                            std::span<double> uy, int workers) const {
  parallel_for(targets.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [vx, vy] = sum_window(targets[i]);
      ux[i] = vx;
      uy[i] = vy;
    }
  });
}

std::pair<double, double> induced_velocity(const Ensemble& ens, Point z) {
  return VelocityField(ens).induced(z);
}

std::pair<double, double> total_velocity(const Ensemble& ens, Point z) {
  const auto [ux, uy] = induced_velocity(ens, z);
  return {ens.profile.f(z.y) + ux, uy};
}

namespace {

// Total velocity at every blob, with sources placed at `pos`.
void stage_velocity(const Ensemble& ens, std::span<const Point> pos, std::vector<double>& vx,
                    std::vector<double>& vy, int workers, double speed_limit, StepStats& stats) {
  const VelocityField field(ens, pos);
  field.induced(pos, vx, vy, workers);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double speed = std::hypot(vx[i], vy[i]);
    if (!(speed <= speed_limit)) {
      throw NumericalError("velocity blow-up: |u| = " + csv::num(speed));
    }
    stats.max_speed = std::max(stats.max_speed, speed);
    vx[i] += ens.profile.f(pos[i].y);
  }
}

}  // namespace

Ensemble advance(const Ensemble& ens, double dt, Integrator integrator, int workers,
                 StepStats* stats_out) {
  StepStats stats;
  const std::size_t n = ens.blobs.size();
  const double speed_limit = 1e3 * (1.0 + ens.profile.sup_f());
  std::vector<Point> z0(n);
  for (std::size_t i = 0; i < n; ++i) z0[i] = ens.blobs[i].pos;

  std::vector<double> vx(n), vy(n);
  std::vector<Point> out(n);
  if (integrator == Integrator::euler) {
    stage_velocity(ens, z0, vx, vy, workers, speed_limit, stats);
    for (std::size_t i = 0; i < n; ++i) out[i] = {z0[i].x + dt * vx[i], z0[i].y + dt * vy[i]};
  } else {
    std::vector<double> ax(n, 0.0), ay(n, 0.0);
    std::vector<Point> stage(n);
    const double frac[3] = {0.5, 0.5, 1.0};
    const double weight[4] = {1.0, 2.0, 2.0, 1.0};
    stage_velocity(ens, z0, vx, vy, workers, speed_limit, stats);
    for (int s = 0; s < 4; ++s) {
      if (s > 0) stage_velocity(ens, stage, vx, vy, workers, speed_limit, stats);
      for (std::size_t i = 0; i < n; ++i) {
        ax[i] += weight[s] * vx[i];
        ay[i] += weight[s] * vy[i];
      }
      if (s < 3) {
        for (std::size_t i = 0; i < n; ++i) {
          stage[i] = {z0[i].x + frac[s] * dt * vx[i],
                      clamp_to_channel(z0[i].y + frac[s] * dt * vy[i], stats.clamp_warnings)};
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = {z0[i].x + dt / 6.0 * ax[i], z0[i].y + dt / 6.0 * ay[i]};
    }
  }

  Ensemble next = ens;
  for (std::size_t i = 0; i < n; ++i) {
    next.blobs[i].pos = {out[i].x, clamp_to_channel(out[i].y, stats.clamp_warnings)};
  }
  next.t = ens.t + dt;
  next.refresh_cutoff();
  if (stats_out) {
    stats_out->clamp_warnings += stats.clamp_warnings;
    stats_out->max_speed = std::max(stats_out->max_speed, stats.max_speed);
  }
  return next;
}

Ensemble step(const Ensemble& ens, const SimParams& params, int workers, StepStats* stats) {
  if (!(params.dt > 0.0)) throw ValidationError("time step must be positive");
  return advance(ens, params.dt, params.integrator, workers, stats);
}

double velocity_scale(const Ensemble& ens, int workers) {
  const std::size_t n = ens.blobs.size();
  std::vector<Point> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = ens.blobs[i].pos;
  std::vector<double> ux(n), uy(n);
  VelocityField(ens, pos).induced(pos, ux, uy, workers);
  double umax = 0.0;
  for (std::size_t i = 0; i < n; ++i) umax = std::max(umax, std::hypot(ux[i], uy[i]));
  return ens.profile.sup_f() + umax;
}

void check_time_step(const Ensemble& ens, const SimParams& params, int workers) {
  if (!(params.dt > 0.0)) throw ValidationError("time step must be positive");
  const double limit = 0.5 * ens.reg.eps_blob / velocity_scale(ens, workers);
  if (params.dt > limit) {
    throw ValidationError("dt = " + csv::num(params.dt) + " exceeds the advective limit " +
                          csv::num(limit) + " (0.5 eps_blob / V_max)");
  }
}

void write_checkpoint(const std::string& path, const Ensemble& ens) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write checkpoint " + path);
  out << "x,y,area,omega0,fprime0\n";
  for (const auto& b : ens.blobs) {
    out << csv::num(b.pos.x) << ',' << csv::num(b.pos.y) << ',' << csv::num(b.area) << ','
        << csv::num(b.omega0) << ',' << csv::num(b.fprime0) << '\n';
  }
}

std::vector<VortexBlob> read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{"x", "y", "area", "omega0", "fprime0"}) {
    throw ValidationError("checkpoint " + path + " lacks the x,y,area,omega0,fprime0 header");
  }
  std::vector<VortexBlob> blobs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 5) throw ValidationError("bad checkpoint row: " + line);
    try {
      VortexBlob b{{std::stod(cells[0]), std::stod(cells[1])}, std::stod(cells[2]), std::stod(cells[3]),
                   std::stod(cells[4])};
      validate_blob(b);
      blobs.push_back(b);
    } catch (const std::logic_error&) {
      throw ValidationError("bad checkpoint row: " + line);
    }
  }
  return blobs;
}

}  // namespace shearblob
