#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "sllg/brownian.hpp"
#include "sllg/diagnostics.hpp"
#include "sllg/field.hpp"
#include "sllg/rng.hpp"
#include "sllg/rough_driver.hpp"
#include "sllg/rotation.hpp"
#include "sllg/spde.hpp"

namespace sllg {

struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Observed order log2(e(dx) / e(dx/2)) averaged over consecutive refinements.
inline double observed_order(const std::vector<double>& errors) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) s += std::log2(errors[i] / errors[i + 1]);
  return errors.size() < 2 ? 0.0 : s / static_cast<double>(errors.size() - 1);
}

inline SphereField unit_circle_field(std::size_t n, double length) {
  return SphereField::from_function(Grid1D(n, length), [](double x) { return Vec3{std::cos(x), std::sin(x), 0.0}; });
}

/// In-plane twist (cos phi, sin phi, 0) with phi = eps (cos(pi x / L) + cos(2 pi x / L) / 2);
/// satisfies the Neumann condition exactly.
inline SphereField neumann_twist(std::size_t n, double length, double eps) {
  const double k = std::numbers::pi / length;
  return SphereField::from_function(Grid1D(n, length), [=](double x) {
    const double phi = eps * (std::cos(k * x) + 0.5 * std::cos(2.0 * k * x));
    return Vec3{std::cos(phi), std::sin(phi), 0.0};
  });
}

/// Smooth unit field from a few random Fourier modes, normalized.
inline SphereField random_smooth_field(std::size_t n, double length, std::uint64_t seed) {
  Rng rng(seed, 0);
  Vec3 c0 = rng.normal3(), c1 = rng.normal3(), c2 = rng.normal3(), s1 = rng.normal3();
  c0 += Vec3{0.0, 0.0, 3.0};
  const double k = std::numbers::pi / length;
  return SphereField::from_function(Grid1D(n, length), [=](double x) {
    return c0 + 0.5 * std::cos(k * x) * c1 + 0.3 * std::cos(2.0 * k * x) * c2 + 0.4 * std::sin(1.3 * k * x) * s1;
  });
}

/// Identity suite on synthetic fields and random paths.
inline std::vector<InvariantCheck> run_invariant_suite(std::uint64_t seed) {
  std::vector<InvariantCheck> out;
  auto add = [&](std::string name, double value, double tol, bool pass) {
    out.push_back({std::move(name), value, tol, pass});
  };
  const double pi = std::numbers::pi;

  {
    std::vector<double> lap, orth, drift_eq;
    for (std::size_t n : {65u, 129u, 257u}) {
      const auto u = unit_circle_field(n, pi);
      lap.push_back(laplacian_identity_residual(u));
      drift_eq.push_back(drift_equivalent_residual(u));
      orth.push_back(orthogonality_residual(unit_circle_field(n, 2.0 * pi)));
    }
    const double p_lap = observed_order(lap);
    add("laplacian_identity_order", p_lap, 1.8, p_lap >= 1.8);
    const double p_drift = observed_order(drift_eq);
    add("drift_equivalent_order", p_drift, 1.8, p_drift >= 1.8);
    add("orthogonality_residual", orth.back(), 1e-3, orth.back() <= 1e-3);
  }
  {
    const auto u = random_smooth_field(129, 1.0, seed);
    AnisotropyParams p;
    p.lambda1 = 0.7;
    p.A = Mat3::diagonal(0.1, -0.2, 0.3);
    p.b = {0.05, 0.0, -0.1};
    const auto d = drift(u, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(dot(d[i], u[i])) / std::max(1.0, norm(d[i])));
    add("drift_tangency", worst, 1e-13, worst <= 1e-13);

    const auto pw = poincare_wirtinger(u.values(), u.grid());
    add("poincare_wirtinger_margin", pw.bound - pw.deviation, 0.0, pw.deviation <= pw.bound * (1.0 + 1e-6));

    const auto pc = poincare_cross_check(neumann_twist(129, 1.0, 0.5));
    add("poincare_cross_check_margin", pc.slack(), -pc.allowance, pc.pass());
  }
  {
    Rng rng(seed, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vec3 e = rng.uniform_on_sphere();
      const Vec3 v = rng.uniform_on_sphere();
      worst = std::max(worst, std::abs(norm(rodrigues(v, e, 10.0 * rng.normal())) - 1.0));
    }
    add("rotation_isometry", worst, 1e-14, worst <= 1e-14);
  }
  {
    double anti = 0.0, chen = 0.0, geo = 0.0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const auto path = sample_brownian(seed, 1e-2, 64, 3, trial + 2);
      const std::vector<std::size_t> part{0, 16, 40, 64};
      const auto rd = second_level(path, part);
      for (std::size_t m = 0; m < rd.n_intervals(); ++m) {
        anti = std::max(anti, antisymmetry_residual(rd.W[m]));
        geo = std::max(geo, geometric_residual(rd.W[m], rd.WW[m]));
      }
      chen = std::max(chen, chen_residual(path, 0, 16, 64));
      chen = std::max(chen, chen_residual(path, 16, 40, 64));
    }
    add("rough_driver_antisymmetry", anti, 1e-12, anti <= 1e-12);
    add("rough_driver_chen", chen, 1e-12, chen <= 1e-12);
    add("rough_driver_geometric", geo, 1e-12, geo <= 1e-12);
  }
  return out;
}

}  // namespace sllg
