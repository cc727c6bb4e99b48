#include <gtest/gtest.h>

#include <vector>

#include "sllg/sllg.hpp"

using namespace sllg;

TEST(RoughDriver, FirstLevelIsAntisymmetric) {
  const Vec3 w{0.3, -1.2, 0.7};
  const Mat3 W = first_level(w);
  EXPECT_EQ(antisymmetry_residual(W), 0.0);
  const Vec3 v{1.0, 2.0, 3.0};
  // W acts as v -> v x w.
  EXPECT_NEAR(norm(W * v - cross(v, w)), 0.0, 1e-15);
}

TEST(RoughDriver, SingleLinearPieceHasNoArea) {
  const auto p = BrownianPath::from_increments3(0.1, {Vec3{1.0, 2.0, -1.0}});
  const auto d = driver_increment(p, 0, 1);
  EXPECT_LE(max_abs(d.WW - 0.5 * (d.W * d.W)), 1e-15);
}

TEST(RoughDriver, GeometricAndChenOnRandomPaths) {
  double geo = 0.0, chen = 0.0, anti = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto p = sample_brownian(11, 1e-2, 50, 3, s);
    const std::vector<std::size_t> part{0, 7, 31, 50};
    const auto rd = second_level(p, part);
    for (std::size_t m = 0; m < rd.n_intervals(); ++m) {
      geo = std::max(geo, geometric_residual(rd.W[m], rd.WW[m]));
      anti = std::max(anti, antisymmetry_residual(rd.W[m]));
    }
    chen = std::max(chen, chen_residual(p, 0, 7, 50));
    chen = std::max(chen, chen_residual(p, 7, 31, 50));
  }
  EXPECT_LE(geo, 1e-12);
  EXPECT_LE(chen, 1e-12);
  EXPECT_EQ(anti, 0.0);
}

TEST(RoughDriver, LevyAreaOfSquareLoop) {
  // Unit square in the (1,2) plane traversed counterclockwise: area 1, net increment 0.
  const auto p = BrownianPath::from_increments3(
      1.0, {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{-1, 0, 0}, Vec3{0, -1, 0}});
  const Mat3 w = iterated_integrals(p, 0, 4);
  EXPECT_NEAR(0.5 * (w(0, 1) - w(1, 0)), 1.0, 1e-15);
}

TEST(RoughDriver, PartitionValidation) {
  const auto p = sample_brownian(1, 0.1, 10, 3);
  EXPECT_THROW(second_level(p, std::vector<std::size_t>{0}), ConfigError);
  EXPECT_THROW(second_level(p, std::vector<std::size_t>{0, 5, 5}), ConfigError);
  EXPECT_THROW(second_level(p, std::vector<std::size_t>{0, 11}), ConfigError);
  EXPECT_THROW(second_level(sample_brownian(1, 0.1, 10, 1), std::vector<std::size_t>{0, 5}), ConfigError);
}

TEST(RoughDriver, PVariationIsMonotoneInDepth) {
  const auto p = sample_brownian(3, 1e-3, 1024, 1);
  const auto w = p.positions1();
  double prev = 0.0;
  for (int d = 0; d <= 10; ++d) {
    const double v = p_variation(std::span<const double>(w), 2.5, d);
    EXPECT_GE(v, prev);
    prev = v;
  }
}
