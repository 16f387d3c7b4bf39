#include "shearblob/channel_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shearblob/errors.hpp"

namespace shearblob {

namespace {

constexpr double kPi = std::numbers::pi;

struct Denominators {
  double minus = 0.0;  // cosh(pi dx) - cos(pi (y - y'))
  double plus = 0.0;   // cosh(pi dx) - cos(pi (y + y'))
};

Denominators denominators(Point z, Point zp) {
  const double shx = std::sinh(0.5 * kPi * (z.x - zp.x));
  const double sm = std::sin(0.5 * kPi * (z.y - zp.y));
  const double sp = std::sin(0.5 * kPi * (z.y + zp.y));
  const double base = 2.0 * shx * shx;
  return {base + 2.0 * sm * sm, base + 2.0 * sp * sp};
}

}  // namespace

double green(Point z, Point zp) {
  // ln(A+/A-) = log1p((A+ - A-)/A-), A+ - A- = 2 sin(pi y) sin(pi y').
  const Denominators d = denominators(z, zp);
  const double gap = 2.0 * sin_pi_channel(z.y) * sin_pi_channel(zp.y);
  return -std::log1p(gap / d.minus) / (4.0 * kPi);
}

double green_regularized(Point z, Point zp, RegularizationParams reg) {
  const Denominators d = denominators(z, zp);
  const double c = reg.denominator_shift();
  const double gap = 2.0 * sin_pi_channel(z.y) * sin_pi_channel(zp.y);
  return -std::log1p(gap / (d.minus + c)) / (4.0 * kPi);
}

std::pair<double, double> kernel_x_components(Point z, Point zp, RegularizationParams reg) {
  const Denominators d = denominators(z, zp);
  const double c = reg.denominator_shift();
  const double k1 = -0.25 * std::sin(kPi * (z.y - zp.y)) / (d.minus + c);
  const double k2 = 0.25 * std::sin(kPi * (z.y + zp.y)) / (d.plus + c);
  return {k1, k2};
}

KernelValue biot_savart_kernel(Point z, Point zp, RegularizationParams reg) {
  const Denominators d = denominators(z, zp);
  const double c = reg.denominator_shift();
  const double am = d.minus + c;
  const double ap = d.plus + c;
  const double k1 = -0.25 * std::sin(kPi * (z.y - zp.y)) / am;
  const double k2 = 0.25 * std::sin(kPi * (z.y + zp.y)) / ap;
  const double ky =
      0.5 * std::sinh(kPi * (z.x - zp.x)) * sin_pi_channel(z.y) * sin_pi_channel(zp.y) / (am * ap);
  return {k1 + k2, ky};
}

double blob_core_density(Point z, Point zp, RegularizationParams reg) {
  // For g = ln(A + c) with A = cosh(pi X) - cos(pi Y):
  //   Laplacian g = pi^2 c (cosh(pi X) + cos(pi Y)) / (A + c)^2.
  const Denominators d = denominators(z, zp);
  const double c = reg.denominator_shift();
  const double ch = std::cosh(kPi * (z.x - zp.x));
  const double sum_minus = ch + std::cos(kPi * (z.y - zp.y));
  const double sum_plus = ch + std::cos(kPi * (z.y + zp.y));
  const double am = d.minus + c;
  const double ap = d.plus + c;
  return 0.25 * kPi * c * (sum_minus / (am * am) - sum_plus / (ap * ap));
}

double kernel_matches_green_gradient(Point z, Point zp, double h) {
  const double dgdx = (green({z.x + h, z.y}, zp) - green({z.x - h, z.y}, zp)) / (2.0 * h);
  const double dgdy = (green({z.x, z.y + h}, zp) - green({z.x, z.y - h}, zp)) / (2.0 * h);
  const KernelValue k = biot_savart_kernel(z, zp);
  return std::max(std::abs(-dgdy - k.kx), std::abs(dgdx - k.ky));
}

double decay_envelope(double dx_abs, double envelope_constant) {
  if (!(dx_abs >= 1.0)) {
    throw ValidationError("decay_envelope: |x - x'| must be >= 1 (near field has no exponential bound)");
  }
  return envelope_constant * std::exp(-kPi * dx_abs);
}

double decay_envelope(double dx_abs) { return decay_envelope(dx_abs, kEnvelopeConstant); }

double truncation_cutoff(double tol, double total_abs_weight) {
  if (!(tol > 0.0) || !(total_abs_weight > 0.0)) {
    throw ValidationError("truncation_cutoff: tol and total_abs_weight must be positive");
  }
  const double l = std::log(kEnvelopeConstant * total_abs_weight / tol) / kPi;
  return std::max(1.0, l);
}

double kernel_envelope_magnitude(Point z, Point zp) {
  const auto [k1, k2] = kernel_x_components(z, zp);
  const double ky = biot_savart_kernel(z, zp).ky;
  const double kx = std::abs(k1) + std::abs(k2);
  return std::hypot(kx, ky);
}

}  // namespace shearblob
