#pragma once

// Slow, independent ground truth for the fast paths: untruncated direct
// summation through biot_savart_kernel, grid quadrature of the Biot-Savart
// integral, finite-difference field checks and kernel integral quadrature.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "shearblob/vortex_dynamics.hpp"

namespace shearblob::oracle {

struct GridField {
  Rect bounds;
  double h = 0.1;
  std::vector<double> values;  // row-major, x fastest; optional

  std::vector<Point> points() const;  // cell centres
};

// Untruncated sum_j w_j K_eps(z, z_j) in input order.
std::pair<double, double> direct_velocity(const Ensemble& ens, Point z);

// Midpoint-rule Biot-Savart integral of a smooth vorticity on a grid aligned
// so that z is a cell centre. The singular cell is skipped and replaced by
// its local expansion h^2 (omega K^x_2(z,z) + omega_y/(4 pi), -omega_x/(4 pi)).
std::pair<double, double> quadrature_velocity(const std::function<double(Point)>& omega,
                                              const Rect& support, double h, Point z);

struct FieldCheck {
  double div_max = 0.0;
  double curl_residual = 0.0;
};

// Central differences (step fd_step) of the direct velocity at each probe
// point: max |div u| and max |curl u - sum_j w_j blob_core_density(z, z_j)|.
FieldCheck field_checks(const Ensemble& ens, const GridField& probe, double fd_step = 1e-4);

enum class KernelComponent { kx, ky };

struct IntegralBound {
  double ratio = 0.0;             // integral / d(y')
  double tail_ratio = 0.0;        // bound on the |x - x'| > 12 remainder, / d(y')
  double refinement_change = 0.0; // relative change under quadrature refinement
  bool converged = true;
};

inline constexpr double kIntegralHalfWidth = 12.0;
inline constexpr double kIntegralConvergenceTol = 1e-4;

// ky: integral over the channel of d(y) e^{-a(x-x')} |K^y(z,z')| dz.
// kx: integral of e^{-a(x-x')} |K^x(z,z')| over the strip between y' and
//     its nearest wall, the region the horizontal-kernel estimate reduces to.
// Both are divided by d(y'). a = pi/2.
IntegralBound kernel_integral_bound(Point zp, KernelComponent which);

// Largest |K(z,z')| / envelope over `samples` random pairs with
// 1 <= |x - x'| <= 8 (envelope measured with |K^x_1| + |K^x_2|). Values
// above one violate the screening bound.
double screening_scan(int samples, std::uint64_t seed, double envelope_constant, double eps_blob = 0.0);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Kernel invariants: Dirichlet walls, no-penetration, symmetry,
// gradient consistency and order, screening, regularization limit.
std::vector<OracleCheck> kernel_selftest(double envelope_constant, std::uint64_t seed = 20240611);

// Fast path vs direct summation at random targets.
OracleCheck compare_fast_direct(const Ensemble& ens, int targets, std::uint64_t seed, int workers = 1);

void write_oracle_report(const std::string& path, const std::vector<OracleCheck>& checks);

}  // namespace shearblob::oracle
