#pragma once

// Dirichlet Green function and Biot-Savart kernel of the strip R x [0,1].
//
//   G(z,z') = -1/(4 pi) ln( (cosh(pi dx) - cos(pi(y+y'))) / (cosh(pi dx) - cos(pi(y-y'))) )
//   K = grad_perp_z G = (-d_y G, d_x G),  K^x = K^x_1 + K^x_2
//
// Both denominators are evaluated as 2 sinh^2(pi dx/2) + 2 sin^2(pi dy/2),
// which stays accurate as z' -> z. Blob regularization adds
// pi^2 eps^2 / 2 to each denominator and leaves the numerators alone, so the
// regularized kernel is still the perpendicular gradient of a stream
// function that vanishes on both walls.

#include <cmath>
#include <numbers>
#include <utility>

namespace shearblob {

struct Point {
  double x = 0.0;
  double y = 0.0;  // 0 <= y <= 1
};

struct KernelValue {
  double kx = 0.0;
  double ky = 0.0;
};

struct RegularizationParams {
  double eps_blob = 0.0;  // zero selects the exact kernel

  // pi^2 eps^2 / 2, the amount added to each cosh - cos denominator.
  double denominator_shift() const {
    return 0.5 * std::numbers::pi * std::numbers::pi * eps_blob * eps_blob;
  }
};

struct TruncationPolicy {
  double l_cut = 0.0;  // horizontal interaction cutoff
  double tol = 0.0;    // absolute error budget per velocity evaluation
};

// Envelope constant for |K| e^{pi |x - x'|}, |x - x'| >= 1. It bounds
// |K^x_1| + |K^x_2| rather than |K^x| so the same constant also covers the
// regularized kernel (whose components are each no larger than the exact
// ones). Frozen from a dense scan; see tests/unit/channel_kernel_test.cpp.
inline constexpr double kEnvelopeScanMax = 1.0018709365986609;
inline constexpr double kEnvelopeSafety = 1.25;
inline constexpr double kEnvelopeConstant = kEnvelopeScanMax * kEnvelopeSafety;

// sin(pi y) for y in [0,1], exactly zero on both walls.
inline double sin_pi_channel(double y) {
  return std::sin(std::numbers::pi * std::fmin(y, 1.0 - y));
}

// Distance to the nearest wall.
inline double wall_distance(double y) { return std::fmin(y, 1.0 - y); }

double green(Point z, Point zp);

// Stream function of a single regularized blob: G with shifted denominators.
double green_regularized(Point z, Point zp, RegularizationParams reg);

KernelValue biot_savart_kernel(Point z, Point zp, RegularizationParams reg = {});

// (K^x_1, K^x_2): the direct and image parts of the horizontal kernel.
std::pair<double, double> kernel_x_components(Point z, Point zp, RegularizationParams reg = {});

// Laplacian of green_regularized in z: the smoothed vorticity a unit blob
// at zp actually carries. Its channel integral is 1 - O(eps^2); the wall
// images remove the rest.
double blob_core_density(Point z, Point zp, RegularizationParams reg);

// Max deviation between central differences of green (step h) and the
// exact kernel. Test helper.
double kernel_matches_green_gradient(Point z, Point zp, double h);

// C_env e^{-pi dx_abs}; throws ValidationError for dx_abs < 1.
double decay_envelope(double dx_abs);
double decay_envelope(double dx_abs, double envelope_constant);

// Smallest l >= 1 with C_env * total_abs_weight * e^{-pi l} <= tol.
double truncation_cutoff(double tol, double total_abs_weight);

// Per-pair envelope quantity sqrt((|K1|+|K2|)^2 + Ky^2) of the exact kernel.
double kernel_envelope_magnitude(Point z, Point zp);

}  // namespace shearblob
