#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace shearblob {

// Background shear (f(y), 0) on [0,1] together with f' and f''.
class ShearProfile {
 public:
  using Fn = std::function<double(double)>;

  ShearProfile(std::string label, Fn f, Fn fp, Fn fpp);

  static ShearProfile couette();                   // f = y
  static ShearProfile constant(double value);      // f = value
  static ShearProfile sine_perturbed(double amp);  // f = 1 + amp sin(pi y)
  // Rows (y, f, f', f'') with strictly increasing y spanning [0,1]; cubic
  // Hermite in f and f', linear in f''.
  static ShearProfile tabulated(std::string label, std::vector<double> y, std::vector<double> f,
                                std::vector<double> fp, std::vector<double> fpp);
  // CSV with header y,f,fp,fpp.
  static ShearProfile from_csv(const std::string& path);

  double f(double y) const { return f_(y); }
  double fp(double y) const { return fp_(y); }
  double fpp(double y) const { return fpp_(y); }
  const std::string& label() const { return label_; }

  // Grid maxima over y_i = i/n, i = 0..n.
  double sup_f(int n = 1024) const;
  double sup_abs_fpp(int n = 1024) const;

 private:
  std::string label_;
  Fn f_, fp_, fpp_;
};

struct HypothesisReport {
  double delta_max = 0.0;                 // largest delta with f >= delta d(y) on the grid
  double m_f = 0.0;                       // inf f
  double fpp_sup = 0.0;                   // sup |f''|
  double curvature_ratio_h2 = 0.0;        // sup(|f''|/d) / delta_max
  double curvature_ratio_nonstag = 0.0;   // fpp_sup / m_f
  double c_star = 0.0;
  bool h1_ok = false;
  bool h2_ok = false;                     // (H2) at delta = delta_max, C_* = c_star
  bool nonstagnant = false;
  bool nonstag_curvature_ok = false;      // fpp_sup <= c_star m_f
};

inline constexpr double kDefaultCStar = 0.05;

double check_h1(const ShearProfile& profile, int grid_n);
bool check_h2(const ShearProfile& profile, double delta, double c_star, int grid_n);
// sup over the grid of |f''(y)|/d(y); +inf when f'' does not vanish on a wall.
double curvature_over_distance(const ShearProfile& profile, int grid_n);
HypothesisReport nonstagnation_report(const ShearProfile& profile, int grid_n);
// Everything above in one report.
HypothesisReport hypothesis_report(const ShearProfile& profile, int grid_n,
                                   double c_star = kDefaultCStar);

}  // namespace shearblob
