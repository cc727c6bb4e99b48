#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sllg/sllg.hpp"

using namespace sllg;

TEST(Measure, BinsAreEqualArea) {
  EmpiricalSphereMeasure m(16, 16);
  EXPECT_NEAR(m.bin_area() * 256.0, 4.0 * std::numbers::pi, 1e-12);
  for (double x : uniform_bin_masses(16, 16)) EXPECT_DOUBLE_EQ(x, 1.0 / 256.0);
}

TEST(Measure, BinOfEdgesAndPoles) {
  EmpiricalSphereMeasure m(4, 8);
  EXPECT_EQ(m.bin_of({0, 0, 1}).band, 3u);
  EXPECT_EQ(m.bin_of({0, 0, -1}).band, 0u);
  const auto b = m.bin_of(normalized(Vec3{-1.0, -1e-9, 0.1}));
  EXPECT_LT(b.sector, 8u);
}

TEST(Measure, MergeIsOrderIndependent) {
  Rng rng(1);
  EmpiricalSphereMeasure a(4, 4), b(4, 4), ab(4, 4), ba(4, 4);
  for (int i = 0; i < 1000; ++i) (i % 3 ? a : b).accumulate(rng.uniform_on_sphere());
  ab.merge(a);
  ab.merge(b);
  ba.merge(b);
  ba.merge(a);
  EXPECT_TRUE(std::equal(ab.counts().begin(), ab.counts().end(), ba.counts().begin()));
  EXPECT_EQ(ab.total(), 1000u);
}

TEST(Measure, MergeRejectsMismatchedBinning) {
  EmpiricalSphereMeasure a(4, 4), b(4, 8);
  EXPECT_THROW(a.merge(b), ConfigError);
}

TEST(Measure, UniformSampleTvMatchesExpectation) {
  // For 1e6 uniform points on 256 bins, E[TV] ~ 0.5 * 256 * sqrt(2 p (1-p) / (pi N)) ~ 0.00637.
  Rng rng(2);
  EmpiricalSphereMeasure m(16, 16);
  std::vector<double> z;
  for (int i = 0; i < 1000000; ++i) {
    const Vec3 v = rng.uniform_on_sphere();
    m.accumulate(v);
    z.push_back(v.z);
  }
  const auto r = distance_report(m, uniform_bin_masses(16, 16), z, uniform_z_cdf);
  EXPECT_NEAR(r.tv, 0.00637, 0.0015);
  EXPECT_LT(r.ks_z, ks_critical_1pct(1e6));
  EXPECT_EQ(r.sample_count, 1000000u);
}

TEST(Measure, TvOfPointMassAgainstUniform) {
  EmpiricalSphereMeasure m(2, 2);
  m.accumulate({0, 0, 1});
  EXPECT_DOUBLE_EQ(tv_distance(m, uniform_bin_masses(2, 2)), 0.75);
}

TEST(Measure, KsOfPointMassAtPole) {
  EXPECT_NEAR(ks_statistic(std::vector<double>(10, 1.0), uniform_z_cdf), 1.0, 1e-12);
}

TEST(Measure, KsOfSingleSampleAtCenter) {
  EXPECT_DOUBLE_EQ(ks_statistic({0.0}, uniform_z_cdf), 0.5);
}

TEST(Measure, KsOfEvenlySpacedQuantiles) {
  std::vector<double> z;
  for (int i = 0; i < 100; ++i) z.push_back(-1.0 + 2.0 * (i + 0.5) / 100.0);
  EXPECT_NEAR(ks_statistic(z, uniform_z_cdf), 0.005, 1e-12);
}

TEST(Measure, CsvSchema) {
  EmpiricalSphereMeasure m(2, 3);
  m.accumulate({1, 0, 0});
  std::ostringstream os;
  write_measure_csv(os, m, uniform_bin_masses(2, 3));
  const auto s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "band,sector,count,area,empirical_mass,reference_mass");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
}
