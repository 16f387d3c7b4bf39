#include "shearblob/shear_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "shearblob/channel_kernel.hpp"
#include "shearblob/errors.hpp"

namespace shearblob {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
// f'' below this on a wall counts as vanishing there.
constexpr double kWallZero = 1e-12;

void require_grid(int grid_n) {
  if (grid_n < 64) throw ValidationError("profile checks need grid_n >= 64");
}

struct Table {
  std::vector<double> y, f, fp, fpp;

  std::size_t interval(double t) const {
    auto it = std::upper_bound(y.begin(), y.end(), t);
    std::size_t i = it == y.begin() ? 0 : static_cast<std::size_t>(it - y.begin()) - 1;
    return std::min(i, y.size() - 2);
  }

  static double hermite(double t, double y0, double y1, double v0, double v1, double d0, double d1) {
    const double h = y1 - y0;
    const double s = (t - y0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * v1 +
           (s3 - s2) * h * d1;
  }
  double eval_f(double t) const {
    const std::size_t i = interval(t);
    return hermite(t, y[i], y[i + 1], f[i], f[i + 1], fp[i], fp[i + 1]);
  }
  double eval_fp(double t) const {
    const std::size_t i = interval(t);
    return hermite(t, y[i], y[i + 1], fp[i], fp[i + 1], fpp[i], fpp[i + 1]);
  }
  double eval_fpp(double t) const {
    const std::size_t i = interval(t);
    const double s = (t - y[i]) / (y[i + 1] - y[i]);
    return (1 - s) * fpp[i] + s * fpp[i + 1];
  }
};

}  // namespace

ShearProfile::ShearProfile(std::string label, Fn f, Fn fp, Fn fpp)
    : label_(std::move(label)), f_(std::move(f)), fp_(std::move(fp)), fpp_(std::move(fpp)) {}

ShearProfile ShearProfile::couette() {
  return {"couette", [](double y) { return y; }, [](double) { return 1.0; },
          [](double) { return 0.0; }};
}

ShearProfile ShearProfile::constant(double value) {
  std::ostringstream label;
  label << "constant(" << value << ")";
  return {label.str(), [value](double) { return value; }, [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

ShearProfile ShearProfile::sine_perturbed(double amp) {
  std::ostringstream label;
  label << "sine-perturbed(" << amp << ")";
  return {label.str(), [amp](double y) { return 1.0 + amp * sin_pi_channel(y); },
          [amp](double y) { return amp * kPi * std::cos(kPi * y); },
          [amp](double y) { return -amp * kPi * kPi * sin_pi_channel(y); }};
}

ShearProfile ShearProfile::tabulated(std::string label, std::vector<double> y, std::vector<double> f,
                                     std::vector<double> fp, std::vector<double> fpp) {
  const std::size_t n = y.size();
  if (n < 2 || f.size() != n || fp.size() != n || fpp.size() != n) {
    throw ValidationError("tabulated profile: need >= 2 rows with y, f, fp, fpp");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(f[i]) || !std::isfinite(fp[i]) ||
        !std::isfinite(fpp[i])) {
      throw ValidationError("tabulated profile: non-finite entry");
    }
    if (i > 0 && !(y[i] > y[i - 1])) throw ValidationError("tabulated profile: y must increase");
  }
  if (std::abs(y.front()) > 1e-12 || std::abs(y.back() - 1.0) > 1e-12) {
    throw ValidationError("tabulated profile: y must span [0,1]");
  }
  auto table = std::make_shared<const Table>(
      Table{std::move(y), std::move(f), std::move(fp), std::move(fpp)});
  return {std::move(label), [table](double t) { return table->eval_f(t); },
          [table](double t) { return table->eval_fp(t); },
          [table](double t) { return table->eval_fpp(t); }};
}

ShearProfile ShearProfile::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open profile table " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("profile table " + path + " is empty");
  std::vector<double> y, f, fp, fpp;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b, c, d;
    if (!(row >> a >> b >> c >> d)) throw ValidationError("bad row in " + path + ": " + line);
    y.push_back(a);
    f.push_back(b);
    fp.push_back(c);
    fpp.push_back(d);
  }
  return tabulated("table:" + path, std::move(y), std::move(f), std::move(fp), std::move(fpp));
}

double ShearProfile::sup_f(int n) const {
  double s = -kInf;
  for (int i = 0; i <= n; ++i) s = std::max(s, f(static_cast<double>(i) / n));
  return s;
}

double ShearProfile::sup_abs_fpp(int n) const {
  double s = 0.0;
  for (int i = 0; i <= n; ++i) s = std::max(s, std::abs(fpp(static_cast<double>(i) / n)));
  return s;
}

double check_h1(const ShearProfile& profile, int grid_n) {
  require_grid(grid_n);
  // f >= delta d(y) forces f >= 0 on the walls; where f vanishes there the
  // quotient's limit is the one-sided difference quotient, which coincides
  // with the first interior grid value and so needs no separate term.
  if (profile.f(0.0) < 0.0 || profile.f(1.0) < 0.0) return 0.0;
  double delta = kInf;
  for (int i = 1; i < grid_n; ++i) {
    const double y = static_cast<double>(i) / grid_n;
    const double fy = profile.f(y);
    if (fy <= 0.0) return 0.0;
    delta = std::min(delta, fy / wall_distance(y));
  }
  return delta;
}

double curvature_over_distance(const ShearProfile& profile, int grid_n) {
  require_grid(grid_n);
  if (std::abs(profile.fpp(0.0)) > kWallZero || std::abs(profile.fpp(1.0)) > kWallZero) return kInf;
  double s = 0.0;
  for (int i = 1; i < grid_n; ++i) {
    const double y = static_cast<double>(i) / grid_n;
    s = std::max(s, std::abs(profile.fpp(y)) / wall_distance(y));
  }
  return s;
}

bool check_h2(const ShearProfile& profile, double delta, double c_star, int grid_n) {
  if (!(delta > 0.0) || !(c_star > 0.0)) throw ValidationError("check_h2: delta and c_star must be positive");
  return curvature_over_distance(profile, grid_n) <= c_star * delta;
}

HypothesisReport nonstagnation_report(const ShearProfile& profile, int grid_n) {
  require_grid(grid_n);
  HypothesisReport r;
  r.m_f = kInf;
  for (int i = 0; i <= grid_n; ++i) {
    const double y = static_cast<double>(i) / grid_n;
    r.m_f = std::min(r.m_f, profile.f(y));
    r.fpp_sup = std::max(r.fpp_sup, std::abs(profile.fpp(y)));
  }
  r.nonstagnant = r.m_f > 0.0;
  r.curvature_ratio_nonstag = r.nonstagnant ? r.fpp_sup / r.m_f : kInf;
  return r;
}

HypothesisReport hypothesis_report(const ShearProfile& profile, int grid_n, double c_star) {
  HypothesisReport r = nonstagnation_report(profile, grid_n);
  r.c_star = c_star;
  r.delta_max = check_h1(profile, grid_n);
  r.h1_ok = r.delta_max > 0.0;
  const double curv = curvature_over_distance(profile, grid_n);
  r.curvature_ratio_h2 = r.h1_ok ? curv / r.delta_max : kInf;
  r.h2_ok = r.h1_ok && curv <= c_star * r.delta_max;
  r.nonstag_curvature_ok = r.nonstagnant && r.fpp_sup <= c_star * r.m_f;
  return r;
}

}  // namespace shearblob
