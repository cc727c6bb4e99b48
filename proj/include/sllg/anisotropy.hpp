#pragma once

#include <cmath>
#include <limits>

#include "sllg/errors.hpp"
#include "sllg/field.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

/// Sign attached to the anisotropic drift terms.
///
/// kLlgEquation: +l1 u x g'(u) - l2 u x (u x g'(u)), as the stochastic equation is
/// usually written with g' on the drift side.
/// kEnergyGradient: the terms obtained from H = u_xx - g'(u), i.e. the opposite sign,
/// which makes the anisotropic part a descent direction of the energy.
enum class DriftConvention { kLlgEquation, kEnergyGradient };

/// Damping constants and the affine anisotropy g'(x) = A x + b.
struct AnisotropyParams {
  Mat3 A = Mat3::zero();
  Vec3 b{};
  double lambda1 = 0.0;
  double lambda2 = 1.0;
  DriftConvention convention = DriftConvention::kLlgEquation;

  void validate() const {
    if (!(lambda2 > 0.0) || !std::isfinite(lambda2))
      throw ConfigError("lambda2 must be positive");
    if (!std::isfinite(lambda1)) throw ConfigError("lambda1 must be finite");
    for (double v : A.a)
      if (!std::isfinite(v)) throw ConfigError("anisotropy matrix must be finite");
    if (!is_finite(b)) throw ConfigError("anisotropy vector b must be finite");
  }

  Vec3 g_prime(const Vec3& v) const { return A * v + b; }

  bool is_zero() const { return A == Mat3::zero() && b == Vec3{}; }

  /// +1 for kLlgEquation, -1 for kEnergyGradient.
  double anisotropy_sign() const {
    return convention == DriftConvention::kLlgEquation ? 1.0 : -1.0;
  }

  /// G = 2 sup_ij |A_ij|^2 + |b|.
  double g_bar() const {
    const double m = A.max_abs_entry();
    return 2.0 * m * m + norm(b);
  }
};

/// Outcome of the smallness condition G < l2 / (2 C_p (2 l2 + |l1|)).
struct SmallnessResult {
  bool pass = false;
  double g_bar = 0.0;
  double threshold = 0.0;
  /// g_bar / threshold; below one passes.
  double ratio = 0.0;
};

inline SmallnessResult smallness_check(const AnisotropyParams& p, double poincare_constant) {
  SmallnessResult r;
  r.g_bar = p.g_bar();
  r.threshold = p.lambda2 / (2.0 * poincare_constant * (2.0 * p.lambda2 + std::abs(p.lambda1)));
  r.ratio = r.g_bar / r.threshold;
  r.pass = r.g_bar < r.threshold;
  return r;
}

/// Discrete energy: half the cell-based Dirichlet energy plus the trapezoid integral of
/// (1/2)(A u).u + b.u. Only the symmetric part of A contributes to the quadratic form.
inline double energy(const SphereField& u, const AnisotropyParams& p) {
  const Grid1D& g = u.grid();
  double aniso = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    aniso += g.weight(i) * (0.5 * dot(p.A * u[i], u[i]) + dot(p.b, u[i]));
  return 0.5 * grad_norm_sq(u) + aniso;
}

}  // namespace sllg
