#include <gtest/gtest.h>

#include <cmath>

#include "sllg/sllg.hpp"

using namespace sllg;

TEST(SdeSphere, DriftIsTangent) {
  AnisotropyParams p;
  p.lambda1 = 0.6;
  p.A = Mat3::diagonal(1.0, -0.5, 2.0);
  p.b = {0.2, 0.1, -0.3};
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rng.uniform_on_sphere();
    EXPECT_NEAR(dot(anisotropic_drift(v, p), v), 0.0, 1e-14);
  }
}

TEST(SdeSphere, StepsStayOnSphere) {
  AnisotropyParams p;
  p.lambda1 = 0.3;
  p.A = Mat3::diagonal(0.0, 0.0, 2.0);
  Rng rng(5);
  Vec3 v{0, 0, 1}, w{1, 0, 0};
  for (int k = 0; k < 100000; ++k) {
    v = sde_step_B(v, p, 1.3, 0.03 * rng.normal3(), 1e-3);
    w = sde_step_A(w, Vec3{0.2, 0.0, 1.0}, 0.03 * rng.normal(), p, 1e-3);
  }
  EXPECT_TRUE(SphereState{v}.valid());
  EXPECT_TRUE(SphereState{w}.valid());
}

TEST(SdeSphere, FixedPointsOfShapeAAreFrozen) {
  const Vec3 h1{0.0, 0.6, 0.8};
  Rng rng(6);
  for (double sgn : {1.0, -1.0}) {
    const Vec3 v0 = sgn * h1;
    Vec3 v = v0;
    for (int k = 0; k < 10000; ++k) v = sde_step_A(v, h1, 0.01 * rng.normal(), AnisotropyParams{}, 1e-4);
    EXPECT_LE(norm(v - v0), 1e-15);
  }
}

TEST(SdeSphere, EnergyGradientDescendsWithoutNoise) {
  AnisotropyParams p;
  p.A = Mat3::diagonal(0.0, 0.0, 2.0);
  p.convention = DriftConvention::kEnergyGradient;
  Vec3 v = normalized(Vec3{1.0, 0.0, 1.0});
  double prev = v.z;
  for (int k = 0; k < 2000; ++k) {
    v = sde_step_B(v, p, 0.0, Vec3{}, 1e-3);
    EXPECT_LE(std::abs(v.z), prev + 1e-15);
    prev = std::abs(v.z);
  }
  EXPECT_LT(prev, 0.05);
}

TEST(SdeSphere, SphericalBrownianMeanDecay) {
  // E[v_3(t)] = exp(-t) from the north pole.
  const double t = 0.5, dt = 1e-3;
  const std::size_t n = static_cast<std::size_t>(t / dt);
  Moments z;
  for (std::uint64_t s = 0; s < 20000; ++s) z.add(spherical_brownian({0, 0, 1}, dt, n, 13, s).back().z);
  EXPECT_NEAR(z.mean(), std::exp(-t), 4.0 * z.stderr_of_mean() + 2e-3);
}

TEST(SdeSphere, ShapeARotationMeanDecay) {
  // Rotation about e_3 by B_t: E[v_1(t)] = E cos B_t = exp(-t / 2).
  const double t = 1.0, dt = 1e-3;
  Moments x;
  for (std::uint64_t s = 0; s < 5000; ++s) {
    Rng rng(14, s);
    Vec3 v{1, 0, 0};
    for (int k = 0; k < 1000; ++k) v = sde_step_A(v, Vec3{0, 0, 1}, std::sqrt(dt) * rng.normal(), AnisotropyParams{}, dt);
    x.add(v.x);
  }
  EXPECT_NEAR(x.mean(), std::exp(-t / 2.0), 4.0 * x.stderr_of_mean() + 1e-3);
}

TEST(SdeSphere, RejectsBadStart) {
  EXPECT_THROW(spherical_brownian({0, 0, 2}, 1e-3, 10, 1), ConfigError);
  EXPECT_THROW(spherical_brownian({0, 0, 1}, 0.0, 10, 1), ConfigError);
}
