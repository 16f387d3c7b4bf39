#include "shearblob/reference_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "shearblob/csv.hpp"
#include "shearblob/errors.hpp"
#include "shearblob/parallel.hpp"

namespace shearblob::oracle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWeight = 0.5 * kPi;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Composite Gauss-Legendre over the panel boundaries in `breaks`.
template <typename F>
double integrate_1d(const std::vector<double>& breaks, F&& f) {
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    if (half <= 0.0) continue;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k) s += kGlWeights[k] * half * f(mid + half * kGlNodes[k]);
  }
  return s;
}

std::vector<double> uniform_breaks(double a, double b, int panels) {
  std::vector<double> br(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i) br[static_cast<std::size_t>(i)] = a + (b - a) * i / panels;
  return br;
}

// Panels on [0,1] refined geometrically toward 0 (ratio 1/4 down to 1e-7).
std::vector<double> graded_breaks(int uniform_panels) {
  std::vector<double> br{0.0};
  for (double r = 1e-7; r < 1.0 / uniform_panels; r *= 4.0) br.push_back(r);
  for (int i = 1; i <= uniform_panels; ++i) br.push_back(static_cast<double>(i) / uniform_panels);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

// Integral of g over the triangle (p, q1, q2) by the Duffy map
// z = p + u (q1 - p) + u v (q2 - q1), which absorbs a 1/|z - p| singularity.
template <typename G>
double duffy_triangle(Point p, Point q1, Point q2, G&& g, int panels) {
  const double ax = q1.x - p.x, ay = q1.y - p.y;
  const double bx = q2.x - q1.x, by = q2.y - q1.y;
  const double jac = std::abs(ax * by - ay * bx);
  if (jac == 0.0) return 0.0;
  const auto ub = graded_breaks(panels);
  const auto vb = uniform_breaks(0.0, 1.0, panels);
  return integrate_1d(ub, [&](double u) {
    return u * jac * integrate_1d(vb, [&](double v) {
             return g(Point{p.x + u * ax + u * v * bx, p.y + u * ay + u * v * by});
           });
  });
}

// Integral of g over [x0, x1] x [y0, y1] when g may be singular at p, which
// lies on the closure of the rectangle's x-range and inside its y-range.
template <typename G>
double singular_rect(Point p, double x0, double x1, double y0, double y1, G&& g, int panels) {
  double s = 0.0;
  const double xs[2] = {x0, x1};
  const double ys[2] = {y0, y1};
  for (double xe : xs) {
    if (xe == p.x) continue;
    for (double ye : ys) {
      if (ye == p.y) continue;
      // Rectangle with corners p and (xe, ye), split along its diagonal.
      s += duffy_triangle(p, Point{xe, p.y}, Point{xe, ye}, g, panels);
      s += duffy_triangle(p, Point{xe, ye}, Point{p.x, ye}, g, panels);
    }
  }
  return s;
}

void sorted_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Breaks at c and c +- s 2^k inside (lo, hi), plus lo and hi.
std::vector<double> graded_about(double c, double s, double lo, double hi) {
  std::vector<double> br{lo, hi};
  if (c > lo && c < hi) br.push_back(c);
  for (double r = s; r < hi - lo; r *= 2.0) {
    if (c - r > lo) br.push_back(c - r);
    if (c + r < hi) br.push_back(c + r);
  }
  sorted_unique(br);
  return br;
}

// Each interval split into `sub` equal panels.
std::vector<double> subdivide(const std::vector<double>& br, int sub) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    for (int i = 0; i < sub; ++i) out.push_back(br[k] + (br[k + 1] - br[k]) * i / sub);
  }
  out.push_back(br.back());
  return out;
}

double integral_at(Point zp, KernelComponent which, int panels) {
  const double d = wall_distance(zp.y);
  // kx: the strip between z' and its nearest wall.
  double y_lo = 0.0, y_hi = 1.0;
  if (which == KernelComponent::kx) {
    if (zp.y <= 0.5) {
      y_hi = d;
    } else {
      y_lo = 1.0 - d;
    }
  }
  const double py = std::clamp(zp.y, y_lo, y_hi);
  auto g = [&](Point z) {
    const double wgt = std::exp(-kWeight * (z.x - zp.x));
    if (which == KernelComponent::ky) {
      return wall_distance(z.y) * wgt * std::abs(biot_savart_kernel(z, zp).ky);
    }
    return wgt * std::abs(biot_savart_kernel(z, zp).kx);
  };
  const Point p{zp.x, py};
  const int sub = std::max(1, panels / 4);

  // The integrand varies on the scale d(y') around z' (and its wall image),
  // so a Duffy box of half-width s = d(y') covers the singularity and the
  // rest of |x - x'| <= 1 is tiled by cells graded geometrically away from it.
  const double s = d;
  const double bx0 = zp.x - s, bx1 = zp.x + s;
  const double by0 = std::max(y_lo, py - s), by1 = std::min(y_hi, py + s);
  double near = singular_rect(p, bx0, bx1, by0, by1, g, panels);

  std::vector<double> yb = graded_about(py, s, y_lo, y_hi);
  for (double extra : {by0, by1, d, 1.0 - d, 0.5}) {
    if (extra > y_lo && extra < y_hi) yb.push_back(extra);
  }
  sorted_unique(yb);
  yb = subdivide(yb, sub);
  const std::vector<double> xb = subdivide(graded_about(zp.x, s, zp.x - 1.0, zp.x + 1.0), sub);
  for (std::size_t i = 0; i + 1 < xb.size(); ++i) {
    for (std::size_t j = 0; j + 1 < yb.size(); ++j) {
      const double xm = 0.5 * (xb[i] + xb[i + 1]), ym = 0.5 * (yb[j] + yb[j + 1]);
      if (xm > bx0 && xm < bx1 && ym > by0 && ym < by1) continue;
      near += integrate_1d({xb[i], xb[i + 1]},
                           [&](double x) { return integrate_1d({yb[j], yb[j + 1]}, [&](double y) { return g({x, y}); }); });
    }
  }

  // Far field, smooth: tensor Gauss-Legendre on the same y breaks.
  const int xp = static_cast<int>(kIntegralHalfWidth - 1.0) * panels;
  double far = 0.0;
  for (int side : {-1, 1}) {
    const double a = zp.x + side * 1.0, b = zp.x + side * kIntegralHalfWidth;
    const auto xf = uniform_breaks(std::min(a, b), std::max(a, b), xp);
    far += integrate_1d(xf, [&](double x) { return integrate_1d(yb, [&](double y) { return g({x, y}); }); });
  }
  return near + far;
}

}  // namespace

std::vector<Point> GridField::points() const {
  std::vector<Point> pts;
  const auto nx = static_cast<long>(std::llround((bounds.x_hi - bounds.x_lo) / h));
  const auto ny = static_cast<long>(std::llround((bounds.y_hi - bounds.y_lo) / h));
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      pts.push_back({bounds.x_lo + (static_cast<double>(i) + 0.5) * h,
                     bounds.y_lo + (static_cast<double>(j) + 0.5) * h});
    }
  }
  return pts;
}

std::pair<double, double> direct_velocity(const Ensemble& ens, Point z) {
  double ux = 0.0, uy = 0.0;
  for (const auto& b : ens.blobs) {
    const double w = b.area * current_vorticity(b, ens.profile);
    const KernelValue k = biot_savart_kernel(z, b.pos, ens.reg);
    ux += w * k.kx;
    uy += w * k.ky;
  }
  return {ux, uy};
}

std::pair<double, double> quadrature_velocity(const std::function<double(Point)>& omega,
                                              const Rect& support, double h, Point z) {
  if (!(h > 0.0)) throw ValidationError("quadrature spacing must be positive");
  // Cell centres z + (i h, j h) that fall inside the support.
  const auto i_lo = static_cast<long>(std::ceil((support.x_lo - z.x) / h - 0.5));
  const auto i_hi = static_cast<long>(std::floor((support.x_hi - z.x) / h + 0.5));
  const auto j_lo = static_cast<long>(std::ceil((support.y_lo - z.y) / h - 0.5));
  const auto j_hi = static_cast<long>(std::floor((support.y_hi - z.y) / h + 0.5));
  double ux = 0.0, uy = 0.0;
  for (long i = i_lo; i <= i_hi; ++i) {
    for (long j = j_lo; j <= j_hi; ++j) {
      if (i == 0 && j == 0) continue;
      const Point c{z.x + static_cast<double>(i) * h, z.y + static_cast<double>(j) * h};
      if (c.y < 0.0 || c.y > 1.0 || !support.contains(c)) continue;
      const double w = omega(c);
      if (w == 0.0) continue;
      const KernelValue k = biot_savart_kernel(z, c);
      ux += w * k.kx;
      uy += w * k.ky;
    }
  }
  ux *= h * h;
  uy *= h * h;
  if (support.contains(z)) {
    // The free-space part of the singular cell integrates to zero against a
    // constant; what remains is the image term and the gradient moment.
    const double fd = 0.5 * h;
    const double w0 = omega(z);
    const double wx = (omega({z.x + fd, z.y}) - omega({z.x - fd, z.y})) / (2.0 * fd);
    const double wy = (z.y + fd <= 1.0 && z.y - fd >= 0.0)
                          ? (omega({z.x, z.y + fd}) - omega({z.x, z.y - fd})) / (2.0 * fd)
                          : 0.0;
    const double k2 = kernel_x_components(z, z).second;
    const double image = std::isfinite(k2) ? k2 : 0.0;
    ux += h * h * (w0 * image + wy / (4.0 * kPi));
    uy += h * h * (-wx / (4.0 * kPi));
  }
  return {ux, uy};
}

FieldCheck field_checks(const Ensemble& ens, const GridField& probe, double fd_step) {
  FieldCheck out;
  const auto pts = probe.points();
  for (const Point& z : pts) {
    const auto [uxe, uye] = direct_velocity(ens, {z.x + fd_step, z.y});
    const auto [uxw, uyw] = direct_velocity(ens, {z.x - fd_step, z.y});
    const auto [uxn, uyn] = direct_velocity(ens, {z.x, z.y + fd_step});
    const auto [uxs, uys] = direct_velocity(ens, {z.x, z.y - fd_step});
    const double div = (uxe - uxw + uyn - uys) / (2.0 * fd_step);
    const double curl = (uye - uyw - (uxn - uxs)) / (2.0 * fd_step);
    double smoothed = 0.0;
    for (const auto& b : ens.blobs) {
      smoothed += b.area * current_vorticity(b, ens.profile) * blob_core_density(z, b.pos, ens.reg);
    }
    out.div_max = std::max(out.div_max, std::abs(div));
    out.curl_residual = std::max(out.curl_residual, std::abs(curl - smoothed));
  }
  return out;
}

IntegralBound kernel_integral_bound(Point zp, KernelComponent which) {
  if (!(zp.y > 0.0 && zp.y < 1.0)) throw ValidationError("kernel_integral_bound needs an interior point");
  const double d = wall_distance(zp.y);
  const double coarse = integral_at(zp, which, 4);
  const double fine = integral_at(zp, which, 8);
  IntegralBound r;
  r.ratio = fine / d;
  r.refinement_change = std::abs(fine - coarse) / std::abs(fine);
  r.converged = r.refinement_change <= kIntegralConvergenceTol;
  // Past |x - x'| = L the integrand is below C_env e^{-(pi - a)|x - x'|} on
  // either side (d(y) <= 1/2 for ky, y-range <= d(y') for kx).
  const double height = which == KernelComponent::ky ? 0.5 : d;
  r.tail_ratio = 2.0 * height * kEnvelopeConstant * std::exp(-(kPi - kWeight) * kIntegralHalfWidth) /
                 (kPi - kWeight) / d;
  return r;
}

double screening_scan(int samples, std::uint64_t seed, double envelope_constant, double eps_blob) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> dist(1.0, 8.0);
  const RegularizationParams reg{eps_blob};
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double dx = dist(rng) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    const Point zp{unit(rng) * 4.0 - 2.0, unit(rng)};
    const Point z{zp.x + dx, unit(rng)};
    const KernelValue k = biot_savart_kernel(z, zp, reg);
    const double mag = std::hypot(k.kx, k.ky);
    worst = std::max(worst, mag / decay_envelope(std::abs(dx), envelope_constant));
  }
  return worst;
}

std::vector<OracleCheck> kernel_selftest(double envelope_constant, std::uint64_t seed) {
  std::vector<OracleCheck> checks;
  auto add = [&](std::string name, double value, double tol) {
    checks.push_back({std::move(name), value, tol, value <= tol});
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_point = [&] { return Point{unit(rng) * 6.0 - 3.0, unit(rng)}; };

  double wall_g = 0.0, wall_uy = 0.0, sym = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Point a = random_point();
    const Point b = random_point();
    const double wall = (i % 2 == 0) ? 0.0 : 1.0;
    wall_g = std::max({wall_g, std::abs(green({a.x, wall}, b)), std::abs(green(a, {b.x, wall}))});
    for (double eps : {0.0, 0.05, 0.2}) {
      wall_uy = std::max(wall_uy, std::abs(biot_savart_kernel({a.x, wall}, b, {eps}).ky));
    }
    sym = std::max(sym, std::abs(green(a, b) - green(b, a)));
  }
  add("dirichlet_wall_green", wall_g, 1e-14);
  add("no_penetration_wall_ky", wall_uy, 1e-15);
  add("green_symmetry", sym, 1e-15);

  const Point z{0.1, 0.45}, zp{-0.15, 0.6};
  add("green_gradient_h1e-4", kernel_matches_green_gradient(z, zp, 1e-4), 1e-6);
  const double r1 = kernel_matches_green_gradient(z, zp, 4e-3);
  const double r2 = kernel_matches_green_gradient(z, zp, 2e-3);
  add("green_gradient_order_deviation", std::abs(r1 / r2 - 4.0), 0.5);
  add("green_gradient_near_wall", kernel_matches_green_gradient({0.0, 0.01}, {0.2, 0.3}, 1e-5), 1e-4);

  add("screening_exact", screening_scan(10000, seed + 1, envelope_constant), 1.0);
  add("screening_regularized", screening_scan(10000, seed + 2, envelope_constant, 0.05), 1.0);

  double reg_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Point a = random_point();
    const Point b{a.x + 0.2 + unit(rng), unit(rng)};
    const KernelValue e = biot_savart_kernel(a, b);
    const KernelValue r = biot_savart_kernel(a, b, {1e-3});
    reg_err = std::max(reg_err, std::hypot(e.kx - r.kx, e.ky - r.ky) / std::max(1.0, std::hypot(e.kx, e.ky)));
  }
  add("regularization_limit_eps1e-3", reg_err, 1e-4);
  return checks;
}

OracleCheck compare_fast_direct(const Ensemble& ens, int targets, std::uint64_t seed, int workers) {
  double lo = 0.0, hi = 0.0;
  if (!ens.blobs.empty()) {
    lo = hi = ens.blobs.front().pos.x;
    for (const auto& b : ens.blobs) {
      lo = std::min(lo, b.pos.x);
      hi = std::max(hi, b.pos.x);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo - 2.0, hi + 2.0);
  std::uniform_real_distribution<double> uy(0.0, 1.0);
  std::vector<Point> pts(static_cast<std::size_t>(targets));
  for (auto& p : pts) p = {ux(rng), uy(rng)};
  std::vector<double> fx(pts.size()), fy(pts.size());
  VelocityField(ens).induced(pts, fx, fy, workers);
  std::vector<double> err(pts.size());
  parallel_for(pts.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto [dx, dy] = direct_velocity(ens, pts[i]);
      err[i] = std::max(std::abs(fx[i] - dx), std::abs(fy[i] - dy));
    }
  });
  const double worst = err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
  return {"fast_vs_direct_velocity", worst, ens.trunc.tol, worst <= ens.trunc.tol};
}

void write_oracle_report(const std::string& path, const std::vector<OracleCheck>& checks) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "check,value,tolerance,pass\n";
  for (const auto& c : checks) {
    out << c.name << ',' << csv::num(c.value) << ',' << csv::num(c.tolerance) << ','
        << (c.pass ? "pass" : "fail") << '\n';
  }
}

}  // namespace shearblob::oracle
