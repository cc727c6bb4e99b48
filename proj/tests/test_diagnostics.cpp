#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sllg/sllg.hpp"
#include "sllg/invariants.hpp"

using namespace sllg;

namespace {

EnsembleSpec small_spec(const AnisotropyParams& p, std::size_t n_paths, double horizon, double dt) {
  EnsembleSpec s;
  s.params = p;
  s.solver.dt = dt;
  s.options.horizon = horizon;
  s.options.sample_stride = 20;
  s.n_paths = n_paths;
  s.seed = 99;
  return s;
}

}  // namespace

TEST(InequalityReport, PassRule) {
  InequalityReport r;
  r.lhs = 1.0;
  r.rhs = 0.9;
  r.mc_stderr = 0.02;
  r.k = 3.0;
  EXPECT_FALSE(r.pass());
  r.k = 5.0;
  EXPECT_TRUE(r.pass());
  r.k = 0.0;
  r.allowance = 0.1;
  EXPECT_TRUE(r.pass());
  EXPECT_NEAR(r.slack(), -0.1, 1e-15);
}

TEST(Ensemble, IndependentOfWorkerCount) {
  const Grid1D g(33, 1.0);
  const auto u0 = neumann_twist(33, 1.0, 0.6);
  const auto spec = small_spec(AnisotropyParams{}, 6, 0.02, 1e-4);
  const auto a = run_ensemble(u0, NoiseShape::constant_b(g, 1.0), spec, 1);
  const auto b = run_ensemble(u0, NoiseShape::constant_b(g, 1.0), spec, 3);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(a[i].final_state->values()[7].y, b[i].final_state->values()[7].y);
}

TEST(EnergyInequality, HoldsWithConstantNoise) {
  const Grid1D g(33, 1.0);
  const auto u0 = neumann_twist(33, 1.0, 0.6);
  const auto recs = run_ensemble(u0, NoiseShape::constant_b(g, 1.0), small_spec(AnisotropyParams{}, 8, 0.1, 1e-4), 1);
  const double growth = noise_growth_rate(NoiseShape::constant_b(g, 1.0), g);
  EXPECT_EQ(growth, 0.0);
  // The running sum is conserved up to an O(dt) excess, so lhs ~ rhs.
  const auto rep = energy_inequality(recs, 1.0, growth, 2e-3 * grad_norm_sq(u0));
  EXPECT_TRUE(rep.pass()) << rep.lhs << " vs " << rep.rhs;
  EXPECT_NEAR(rep.lhs, rep.rhs, 2e-3 * rep.rhs);
}

TEST(EnergyInequality, VaryingProfileHasPositiveGrowth) {
  const Grid1D g(33, 1.0);
  std::vector<double> h(33);
  for (std::size_t i = 0; i < 33; ++i) h[i] = 1.0 + 0.5 * std::sin(std::numbers::pi * g.node(i));
  const auto shape = NoiseShape::shape_b(h);
  const double growth = noise_growth_rate(shape, g);
  EXPECT_GT(growth, 0.0);
  const auto recs = run_ensemble(SphereField::constant(g, {0, 0, 1}), shape, small_spec(AnisotropyParams{}, 32, 0.2, 1e-4), 1);
  // Starts flat; the gradient is created only by the profile.
  const auto rep = energy_inequality(recs, 1.0, growth);
  EXPECT_TRUE(rep.pass()) << rep.lhs << " vs " << rep.rhs;
  EXPECT_GT(rep.lhs, 0.0);
}

TEST(AnisotropicInequality, Holds) {
  const Grid1D g(33, 1.0);
  AnisotropyParams p;
  p.lambda1 = 0.5;
  p.A = Mat3::diagonal(0.0, 0.0, 1.0);
  p.b = {0.0, 0.2, 0.0};
  const auto u0 = neumann_twist(33, 1.0, 0.6);
  const auto recs = run_ensemble(u0, NoiseShape::constant_b(g, 0.7), small_spec(p, 8, 0.1, 5e-5), 1);
  const auto rep = anisotropic_energy_inequality(recs, p, 0.0);
  EXPECT_TRUE(rep.pass()) << rep.lhs << " vs " << rep.rhs;
  EXPECT_NEAR(rep.constants.at("C_lambda"), (8.0 / 3.0) * (0.25 + 1.0), 1e-14);
}

TEST(ImprovedInequality, GateAndPass) {
  const Grid1D g(33, std::numbers::pi);
  const auto u0 = neumann_twist(33, std::numbers::pi, 0.6);
  AnisotropyParams p;
  p.A = Mat3::diagonal(0.0, 0.0, 2.0);
  const auto spec = small_spec(p, 4, 0.1, 5e-4);
  const auto recs = run_ensemble(u0, NoiseShape::constant_b(g, 1.0), spec, 1);
  EXPECT_THROW(improved_anisotropic_inequality(recs, p, g.poincare_constant(), 0.0), GateError);
  p.A = Mat3::diagonal(0.0, 0.0, 0.05);
  const auto recs2 = run_ensemble(u0, NoiseShape::constant_b(g, 1.0), small_spec(p, 4, 0.5, 5e-4), 1);
  const auto rep = improved_anisotropic_inequality(recs2, p, g.poincare_constant(), 0.0);
  EXPECT_TRUE(rep.pass()) << rep.lhs << " vs " << rep.rhs;
  EXPECT_GT(rep.constants.at("C_lambda"), 0.0);
}

TEST(H2Growth, ReportsFiniteConstant) {
  const Grid1D g(33, 1.0);
  const auto recs = run_ensemble(neumann_twist(33, 1.0, 0.6), NoiseShape::constant_b(g, 1.0),
                                 small_spec(AnisotropyParams{}, 4, 0.05, 1e-4), 1);
  const auto rep = h2_halfnorm_growth(recs);
  EXPECT_TRUE(std::isfinite(rep.constants.at("C_min")));
  EXPECT_TRUE(rep.pass());
}

TEST(PoincareCrossCheck, HoldsForNeumannFields) {
  for (double eps : {0.1, 0.5, 1.0}) {
    const auto rep = poincare_cross_check(neumann_twist(129, 2.0, eps));
    EXPECT_TRUE(rep.pass()) << eps;
  }
}

TEST(Feller, PerturbHitsTargetSize) {
  const auto u0 = neumann_twist(65, 1.0, 0.5);
  const auto w = feller_direction(u0.grid());
  for (double t : {1e-2, 1e-3, 5e-4}) {
    const auto v = perturb(u0, w, t);
    EXPECT_NEAR(h1_distance(u0.values(), v.values(), u0.grid()), t, 1e-9 * t);
  }
  EXPECT_EQ(perturb(u0, w, 0.0).values()[3].x, u0.values()[3].x);
}

TEST(Feller, EnvelopeBoundsItsCalibrationCurves) {
  std::vector<FellerCurve> curves(3);
  for (std::size_t p = 0; p < 3; ++p)
    for (int j = 0; j <= 10; ++j) {
      curves[p].times.push_back(0.1 * j);
      curves[p].ratio.push_back(std::exp(-(1.0 + 0.1 * static_cast<double>(p)) * 0.1 * j));
    }
  const auto fit = fit_envelope(curves);
  EXPECT_NEAR(fit.c, -1.1, 1e-12);
  EXPECT_EQ(envelope_fraction(curves, fit), 1.0);
}

TEST(Feller, SmallExperimentPasses) {
  const Grid1D g(33, 1.0);
  std::vector<double> h(33);
  for (std::size_t i = 0; i < 33; ++i) h[i] = 1.0 + 0.5 * std::sin(std::numbers::pi * g.node(i));
  SolverConfig cfg;
  cfg.dt = 1e-4;
  FellerOptions o;
  o.horizon = 0.2;
  o.n_paths = 16;
  o.calibration_paths = 16;
  o.seed = 3;
  const auto rep = feller_experiment(neumann_twist(33, 1.0, 0.6), AnisotropyParams{}, NoiseShape::shape_b(h), cfg, o, 2);
  EXPECT_EQ(rep.zero_gap_max, 0.0);
  EXPECT_TRUE(rep.first_order_ok());
  EXPECT_TRUE(rep.pass());
}

TEST(Flatness, ConstantFieldStaysConstant) {
  const Grid1D g(33, std::numbers::pi);
  AnisotropyParams p;
  p.A = Mat3::diagonal(0.0, 0.0, 0.3);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  SpdeStepper st(g, p, NoiseShape::constant_b(g, 1.0), cfg);
  auto src = IncrementSource::from_rng(1, 0, 1e-3, 3);
  const auto rep = stationary_flatness(SphereField::constant(g, normalized(Vec3{1, 1, 1})), st, 1.0, src);
  EXPECT_EQ(rep.max_grad_norm, 0.0);
  EXPECT_GT(rep.max_displacement, 0.0);
}

TEST(Flatness, Gates) {
  const Grid1D g(33, std::numbers::pi);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  AnisotropyParams p;
  p.A = Mat3::diagonal(0.0, 0.0, 2.0);
  SpdeStepper big(g, p, NoiseShape::constant_b(g, 1.0), cfg);
  auto src = IncrementSource::zero(3);
  EXPECT_THROW(stationary_flatness(SphereField::constant(g, {0, 0, 1}), big, 0.1, src), GateError);
  std::vector<double> h(33, 1.0);
  h[5] = 2.0;
  SpdeStepper varying(g, AnisotropyParams{}, NoiseShape::shape_b(h), cfg);
  EXPECT_THROW(stationary_flatness(SphereField::constant(g, {0, 0, 1}), varying, 0.1, src), ConfigError);
}

TEST(Sync, SmallExperimentDecays) {
  const Grid1D g(33, std::numbers::pi);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  SyncOptions o;
  o.t_list = {0.0, 1.0, 2.0};
  o.n_paths = 4;
  o.seed = 5;
  const auto rep = sync_experiment(neumann_twist(33, std::numbers::pi, 0.8), AnisotropyParams{},
                                   NoiseShape::constant_b(g, 1.0), cfg, o, 2);
  EXPECT_EQ(rep.horizon, 4.0);
  EXPECT_TRUE(rep.alpha_bound_ok);
  EXPECT_TRUE(rep.pass());
  EXPECT_LT(rep.sup_deviation[2], rep.sup_deviation[1]);
}

TEST(Sync, RequiresZeroAnisotropyAndConstantShapeB) {
  const Grid1D g(33, 1.0);
  SolverConfig cfg;
  AnisotropyParams p;
  p.b = {0.0, 0.0, 0.1};
  EXPECT_THROW(sync_experiment(neumann_twist(33, 1.0, 0.5), p, NoiseShape::constant_b(g, 1.0), cfg, {}, 1), ConfigError);
  EXPECT_THROW(sync_experiment(neumann_twist(33, 1.0, 0.5), AnisotropyParams{}, NoiseShape::constant_a(g, {0, 0, 1}), cfg, {}, 1),
               ConfigError);
}

TEST(Invariants, SuitePasses) {
  for (const auto& c : run_invariant_suite(17)) EXPECT_TRUE(c.pass) << c.name << " = " << c.value;
}
