#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "shearblob/diagnostics.hpp"
#include "shearblob/errors.hpp"

using namespace shearblob;

namespace {

constexpr double kPi = std::numbers::pi;
const RegularizationParams kReg{0.05};

Ensemble patch(const ShearProfile& p, double h, Rect box = {-1.0, 1.0, 0.25, 0.75}, double amp = 0.1) {
  return discretize_initial([&](Point z) { return box.contains(z) ? amp : 0.0; }, box, h, p, kReg, 1e-10);
}

Ensemble single(Point z, double area, double omega, const ShearProfile& p = ShearProfile::couette(),
                RegularizationParams reg = kReg) {
  return Ensemble({{z, area, omega, p.fp(z.y)}}, p, reg, 1e-10);
}

// Blobs displaced from their seed rows, so omega differs from omega0.
Ensemble scrambled(std::uint64_t seed, std::size_t n) {
  const ShearProfile p = ShearProfile::sine_perturbed(0.3);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(0.0, 1.0), uw(-0.5, 0.5), ua(1e-3, 4e-3);
  std::vector<VortexBlob> blobs;
  for (std::size_t k = 0; k < n; ++k) blobs.push_back({{ux(rng), uy(rng)}, ua(rng), uw(rng), p.fp(uy(rng))});
  return Ensemble(std::move(blobs), p, kReg, 1e-10);
}

Ensemble shifted(const Ensemble& e, double dx) {
  Ensemble out = e;
  for (auto& b : out.blobs) b.pos.x += dx;
  return out;
}

std::vector<DiagnosticsRecord> mass_series(const std::function<double(double)>& m,
                                           const std::function<double(double)>& rhs, int n, double dt) {
  std::vector<DiagnosticsRecord> rows;
  for (int k = 0; k < n; ++k) {
    DiagnosticsRecord r;
    r.t = k * dt;
    r.weighted_mass = m(r.t);
    r.damping_rhs = rhs(r.t);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST(WeightedMass, EmptyIsZero) {
  const Ensemble e({}, ShearProfile::couette(), kReg, 1e-10);
  EXPECT_EQ(weighted_mass(e), 0.0);
  EXPECT_EQ(damping_rhs(e, 1.0), 0.0);
}

TEST(WeightedMass, SingleBlobAtOrigin) { EXPECT_DOUBLE_EQ(weighted_mass(single({0.0, 0.3}, 0.02, -0.7)), 0.014); }

TEST(WeightedMass, PatchMatchesClosedForm) {
  const double exact = 0.1 / kPi * (std::exp(kPi / 2) - std::exp(-kPi / 2));
  EXPECT_NEAR(exact, 0.1467, 5e-4);
  EXPECT_NEAR(weighted_mass(patch(ShearProfile::couette(), 0.02)) / exact, 1.0, 0.01);
}

TEST(WeightedSup, SingleBlobAtStart) {
  EXPECT_DOUBLE_EQ(weighted_sup(single({0.0, 0.5}, 0.01, -0.3), 1.0), 0.3);
}

TEST(WeightedSup, RigidShiftScalesByWeight) {
  const Ensemble e = scrambled(3, 200);
  for (double dx : {-1.5, 0.25, 2.0}) {
    EXPECT_NEAR(weighted_sup(shifted(e, dx), 1.0) / weighted_sup(e, 1.0), std::exp(-kPi * dx / 2), 1e-13);
  }
}

TEST(WeightedSup, NonIncreasingUnderTranslation) {
  Ensemble e = single({0.0, 0.5}, 1e-4, 0.1, ShearProfile::constant(1.0));
  double prev = weighted_sup(e, 1.0);
  for (int k = 1; k <= 50; ++k) {
    e = advance(e, 0.02, Integrator::rk4);
    e.t = 0.02 * k;
    const double s = weighted_sup(e, 1.0);
    EXPECT_LE(s, prev * (1.0 + 1e-14));
    prev = s;
  }
}

TEST(LocalNorms, DisjointWindow) {
  const auto [sup, l1] = local_norms(patch(ShearProfile::couette(), 0.05), {5.0, 6.0, 0.0});
  EXPECT_EQ(sup, 0.0);
  EXPECT_EQ(l1, 0.0);
  EXPECT_EQ(a_n_functional(shifted(patch(ShearProfile::couette(), 0.05), 10.0), 3.0), 0.0);
}

TEST(LocalNorms, AllInclusiveWindowGivesMass) {
  const Ensemble e = scrambled(5, 300);
  const auto [sup, l1] = local_norms(e, {-10.0, 10.0, 0.0});
  EXPECT_DOUBLE_EQ(l1, e.total_abs_weight());
  EXPECT_DOUBLE_EQ(sup, vorticity_sup(e));
  const Ensemble p = patch(ShearProfile::couette(), 0.05);
  EXPECT_DOUBLE_EQ(a_n_functional(p, 5.0), p.total_abs_weight());
}

TEST(LocalNorms, HalfCoveredPatch) {
  const double h = 0.02;
  const Ensemble e = patch(ShearProfile::couette(), h);
  const double half = 0.5 * e.total_abs_weight();
  EXPECT_NEAR(local_norms(e, {-1.0, 0.0, 0.0}).second, half, 0.1 * h * 0.5);
}

TEST(AnFunctional, StripClippedPatch) {
  // Rows at y = 0.02 + 0.04 k; d(y) >= 1/4 keeps 13 of 25.
  const Ensemble e = patch(ShearProfile::couette(), 0.04, {-1.0, 1.0, 0.0, 1.0});
  EXPECT_NEAR(a_n_functional(e, 4.0), 13.0 / 25.0 * e.total_abs_weight(), 1e-14);
}

TEST(LocalNorms, MonotoneWindows) {
  const Ensemble e = scrambled(7, 400);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Window inner{-2.0 * u(rng), 2.0 * u(rng), 0.25 + 0.2 * u(rng)};
    const Window outer{inner.x_lo - u(rng), inner.x_hi + u(rng), inner.d_min * u(rng)};
    EXPECT_LE(local_norms(e, inner).second, local_norms(e, outer).second);
  }
  double prev = 0.0;
  for (double n : {2.5, 3.0, 4.0, 8.0, 20.0}) {
    const double a = a_n_functional(e, n);
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(Enstrophy, CouettePatch) {
  EXPECT_NEAR(excess_enstrophy(patch(ShearProfile::couette(), 0.02)), -0.19, 1e-12);
}

TEST(Enstrophy, ZeroPerturbation) {
  const ShearProfile p = ShearProfile::sine_perturbed(0.2);
  const Ensemble e({{{0.3, 0.4}, 0.01, 0.0, p.fp(0.4)}, {{-1.0, 0.8}, 0.01, 0.0, p.fp(0.8)}}, p, kReg, 1e-10);
  EXPECT_EQ(excess_enstrophy(e), 0.0);
  for (auto kind : {CasimirKind::square, CasimirKind::quartic, CasimirKind::abs}) {
    EXPECT_EQ(excess_casimir(e, {kind}), 0.0);
  }
}

TEST(Enstrophy, SignFlipChangesOnlyCrossTerm) {
  const ShearProfile p = ShearProfile::couette();
  const Ensemble a = patch(p, 0.05, {-1.0, 1.0, 0.25, 0.75}, 0.1);
  const Ensemble b = patch(p, 0.05, {-1.0, 1.0, 0.25, 0.75}, -0.1);
  double sq = 0.0, cross = 0.0;
  for (const auto& blob : a.blobs) {
    sq += blob.area * 0.01;
    cross += blob.area * 2.0 * 0.1;
  }
  EXPECT_NEAR(excess_enstrophy(a), sq - cross, 1e-14);
  EXPECT_NEAR(excess_enstrophy(b), sq + cross, 1e-14);
}

TEST(Casimir, SquareEqualsEnstrophy) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Ensemble e = scrambled(seed, 500);
    EXPECT_NEAR(excess_casimir(e, {CasimirKind::square}), excess_enstrophy(e), 1e-12);
  }
}

TEST(Casimir, AbsOnCouettePatch) {
  EXPECT_NEAR(excess_casimir(patch(ShearProfile::couette(), 0.02), {CasimirKind::abs}), -0.1, 1e-12);
}

TEST(Casimir, KindNames) {
  for (auto kind : {CasimirKind::square, CasimirKind::quartic, CasimirKind::abs}) {
    EXPECT_EQ(parse_casimir_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_casimir_kind("cubic"), ValidationError);
}

TEST(Covariance, Translation) {
  const Ensemble e = scrambled(9, 300);
  for (double dx : {-2.0, 0.7, 3.0}) {
    const Ensemble s = shifted(e, dx);
    const double factor = std::exp(-kPi * dx / 2);
    EXPECT_NEAR(weighted_mass(s) / weighted_mass(e), factor, 1e-13 * factor);
    EXPECT_NEAR(damping_rhs(s, 1.3) / damping_rhs(e, 1.3), factor, 1e-13 * factor);
    EXPECT_EQ(excess_enstrophy(s), excess_enstrophy(e));
    EXPECT_EQ(excess_casimir(s, {CasimirKind::quartic}), excess_casimir(e, {CasimirKind::quartic}));
  }
}

TEST(DampingRhs, SingleMidChannelBlob) {
  EXPECT_NEAR(damping_rhs(single({0.0, 0.5}, 0.01, 0.4), 2.0), kPi * 2.0 / 4 * 0.01 * 0.4 * 0.5, 1e-16);
}

TEST(DampingRhs, PatchMatchesSeparableIntegral) {
  // int e^{-pi x/2} over [-1,1] times int d(y) over [1/4,3/4] = 3/16.
  const double exact = kPi / 4 * 0.1 * (2.0 / kPi) * (std::exp(kPi / 2) - std::exp(-kPi / 2)) * 0.1875;
  EXPECT_NEAR(damping_rhs(patch(ShearProfile::couette(), 0.02), 1.0) / exact, 1.0, 1e-3);
}

TEST(VorticityBound, FlatProfileBoundIsSeedMax) {
  const Ensemble e = patch(ShearProfile::couette(), 0.05);
  EXPECT_DOUBLE_EQ(vorticity_sup_bound(e), 0.1);
  EXPECT_DOUBLE_EQ(vorticity_sup(e), 0.1);
}

TEST(FitDecay, ExactExponential) {
  std::vector<std::pair<double, double>> s;
  for (int t = 0; t <= 10; ++t) s.emplace_back(t, std::exp(-0.5 * t));
  const DecayFit f = fit_decay_rate(s);
  EXPECT_NEAR(f.rate, 0.5, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
}

TEST(FitDecay, ConstantSeries) {
  std::vector<std::pair<double, double>> s;
  for (int t = 0; t <= 10; ++t) s.emplace_back(t, 3.0);
  EXPECT_EQ(fit_decay_rate(s).rate, 0.0);
}

TEST(FitDecay, PerturbedExponential) {
  std::vector<std::pair<double, double>> s;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    s.emplace_back(t, 2.0 * std::exp(-0.5 * t) * (1.0 + 0.01 * std::sin(t)));
  }
  const DecayFit f = fit_decay_rate(s);
  EXPECT_NEAR(f.rate, 0.5, 0.01);
  EXPECT_GT(f.r2, 0.999);
}

TEST(FitDecay, WindowAndRejections) {
  std::vector<std::pair<double, double>> s;
  for (int t = 0; t <= 20; ++t) s.emplace_back(t, t < 10 ? std::exp(-0.1 * t) : std::exp(-1.0 * t));
  EXPECT_NEAR(fit_decay_rate(s, 10.0, 20.0).rate, 1.0, 1e-12);
  EXPECT_THROW(fit_decay_rate(s, 0.0, 5.0), ValidationError);
  s[3].second = 0.0;
  EXPECT_THROW(fit_decay_rate(s), ValidationError);
  EXPECT_NO_THROW(fit_decay_rate(s, 5.0, 20.0));
}

TEST(Energy, ZeroPerturbation) {
  const ShearProfile p = ShearProfile::couette();
  const Ensemble e({{{0.0, 0.5}, 0.01, 0.0, p.fp(0.5)}}, p, kReg, 1e-10);
  EXPECT_EQ(excess_energy(e, energy_quadrature_for(e, 0.05, 1e-8)).value, 0.0);
  const Ensemble empty({}, p, kReg, 1e-10);
  EXPECT_EQ(excess_energy(empty, energy_quadrature_for(empty, 0.05, 1e-8)).value, 0.0);
}

TEST(Energy, SingleBlobStableUnderRefinement) {
  // |u|^2 reflects evenly across both walls, so the midpoint rule beats h^2 here.
  const Ensemble e = single({0.013, 0.3}, 0.01, 1.0, ShearProfile::constant(0.0), {0.05});
  double v[3];
  const double spacing[3] = {0.1, 0.05, 0.025};
  for (int k = 0; k < 3; ++k) v[k] = excess_energy(e, energy_quadrature_for(e, spacing[k], 1e-10)).value;
  EXPECT_GT(v[2], 0.0);
  EXPECT_GE(std::abs((v[0] - v[1]) / (v[1] - v[2])), 4.0);
  EXPECT_LT(std::abs(v[1] - v[2]), 1e-2 * v[2]);
}

TEST(Energy, DipoleUnderZeroShearIsPositive) {
  const ShearProfile p = ShearProfile::constant(0.0);
  const Rect box{-0.5, 0.5, 0.15, 0.85};
  const Ensemble e = discretize_initial(
      [](Point z) { return z.y > 0.55 ? 1.0 : (z.y < 0.45 ? -1.0 : 0.0); }, box, 0.05, p, kReg, 1e-10);
  const EnergyEstimate est = excess_energy(e, energy_quadrature_for(e, 0.05, 1e-8), 1, true);
  EXPECT_GT(est.value, 0.0);
  EXPECT_FALSE(est.coarse);
  EXPECT_LT(est.tail_bound, 1e-6 * est.value);
}

TEST(Energy, GridMustCoverScreeningMargin) {
  const Ensemble e = patch(ShearProfile::couette(), 0.05);
  EnergyQuadrature q = energy_quadrature_for(e, 0.05, 1e-8);
  q.rect.x_hi -= 1.0;
  EXPECT_THROW(excess_energy(e, q), ValidationError);
  EXPECT_THROW(energy_quadrature_for(e, 0.0, 1e-8), ValidationError);
}

TEST(Prop41, DecayingMassPasses) {
  const auto rows = mass_series([](double t) { return std::exp(-t); },
                                [](double t) { return 0.5 * std::exp(-t); }, 50, 0.1);
  const Prop41Result r = prop41_check(rows);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.rows.size(), 48u);
  EXPECT_GT(r.worst_margin, 0.0);
}

TEST(Prop41, IncreasingMassFails) {
  const auto rows = mass_series([](double t) { return 1.0 + t; }, [](double) { return 0.0; }, 10, 0.1);
  const Prop41Result r = prop41_check(rows);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.worst_margin, -1.0, 1e-12);
}

TEST(Prop41, ZeroPerturbationPassesVacuously) {
  const auto rows = mass_series([](double) { return 0.0; }, [](double) { return 0.0; }, 10, 0.1);
  const Prop41Result r = prop41_check(rows);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.worst_margin, 0.0);
}

TEST(Prop41, DeltaScaleAndValidation) {
  // dM/dt = -0.5 M; a damping term of 0.4 M passes, scaled by 2 it does not.
  const auto rows = mass_series([](double t) { return std::exp(-0.5 * t); },
                                [](double t) { return 0.4 * std::exp(-0.5 * t); }, 20, 0.05);
  EXPECT_TRUE(prop41_check(rows).pass);
  EXPECT_FALSE(prop41_check(rows, 2.0).pass);
  EXPECT_THROW(prop41_check({rows.begin(), rows.begin() + 4}), ValidationError);
}

TEST(DiagnosticsCsv, RoundTripIsExact) {
  const Ensemble e = scrambled(13, 100);
  DiagnosticsConfig cfg;
  cfg.m_f = 1.0;
  std::vector<DiagnosticsRecord> rows{compute_record(e, cfg)};
  rows.push_back(rows.front());
  rows.back().t = 0.1;
  rows.back().weighted_mass = 1.0 / 3.0;
  const auto path = (std::filesystem::temp_directory_path() / "shearblob_diag_test.csv").string();
  write_diagnostics(path, rows);
  const auto back = read_diagnostics(path);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(format_record(back[k]), format_record(rows[k]));
  EXPECT_EQ(back[1].weighted_mass, 1.0 / 3.0);
  const auto col = read_diagnostics_column(path, "excess_casimir");
  EXPECT_EQ(col[0].second, rows[0].excess_casimir);
  EXPECT_THROW(read_diagnostics_column(path, "nope"), ValidationError);
  std::filesystem::remove(path);
}

TEST(ComputeRecord, FieldsConsistent) {
  const Ensemble e = patch(ShearProfile::couette(), 0.05);
  DiagnosticsConfig cfg;
  cfg.window = {-3.0, 3.0, 0.1};
  const DiagnosticsRecord r = compute_record(e, cfg);
  EXPECT_EQ(r.weighted_mass, weighted_mass(e));
  EXPECT_EQ(r.excess_casimir, excess_casimir(e, {CasimirKind::quartic}));
  EXPECT_EQ(r.a_n, a_n_functional(e, 5.0));
  EXPECT_EQ(r.local_l1, e.total_abs_weight());
  EXPECT_GT(r.weighted_mass, 0.0);
  EXPECT_TRUE(std::isfinite(r.excess_energy));
}
