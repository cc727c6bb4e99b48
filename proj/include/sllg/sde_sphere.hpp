#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sllg/anisotropy.hpp"
#include "sllg/errors.hpp"
#include "sllg/rng.hpp"
#include "sllg/rotation.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

/// A point of the sphere.
struct SphereState {
  Vec3 v{0.0, 0.0, 1.0};

  static constexpr double kUnitTolerance = 1e-12;

  bool valid() const { return is_finite(v) && std::abs(norm(v) - 1.0) <= kUnitTolerance; }
};

/// l1 v x g'(v) - l2 v x (v x g'(v)), with g' negated under the energy-gradient convention.
/// Evaluated with the same operation order as the field drift on a constant field, so a
/// spatially constant SPDE solution and this SDE agree bit for bit.
inline Vec3 anisotropic_drift(const Vec3& v, const AnisotropyParams& p) {
  const Vec3 zero{};
  Vec3 uh = cross(v, zero);
  if (!p.is_zero()) uh += p.anisotropy_sign() * cross(v, p.g_prime(v));
  return p.lambda1 * uh - p.lambda2 * cross(v, uh);
}

inline SphereState anisotropic_drift(const SphereState& s, const AnisotropyParams& p) {
  return {anisotropic_drift(s.v, p)};
}

/// One step of dv = D(v) dt + h2 v x (circle) dW: half rotation, drift Euler, projection,
/// half rotation.
inline Vec3 sde_step_B(const Vec3& v, const AnisotropyParams& p, double h2, const Vec3& dW, double dt) {
  const double len = norm(dW);
  Vec3 e{};
  double c = 1.0, s = 0.0;
  if (len > 0.0) {
    e = dW / len;
    const double theta = 0.5 * h2 * len;
    c = std::cos(theta);
    s = std::sin(theta);
  }
  Vec3 w = len > 0.0 ? rodrigues(v, e, c, s) : v;
  w += dt * anisotropic_drift(w, p);
  w = w / norm(w);
  return len > 0.0 ? rodrigues(w, e, c, s) : w;
}

/// One step of dw = D(w) dt + w x h1 (circle) dB, same splitting as sde_step_B.
inline Vec3 sde_step_A(const Vec3& v, const Vec3& h1, double dB, const AnisotropyParams& p, double dt) {
  const double len = norm(h1);
  Vec3 w = v;
  double c = 1.0, s = 0.0;
  Vec3 e{};
  const bool rotates = len > 0.0 && dB != 0.0;
  if (rotates) {
    e = h1 / len;
    const double theta = 0.5 * len * dB;
    c = std::cos(theta);
    s = std::sin(theta);
    w = rodrigues(w, e, c, s);
  }
  w += dt * anisotropic_drift(w, p);
  w = w / norm(w);
  return rotates ? rodrigues(w, e, c, s) : w;
}

/// Spherical Brownian motion: sde_step_B with g = 0 and h2 = 1. Returns n + 1 states.
inline std::vector<Vec3> spherical_brownian(const Vec3& v0, double dt, std::size_t n, std::uint64_t seed,
                                            std::uint64_t stream = 0) {
  if (!(std::abs(norm(v0) - 1.0) <= SphereState::kUnitTolerance))
    throw ConfigError("spherical_brownian: start point must be a unit vector");
  if (!(dt > 0.0)) throw ConfigError("spherical_brownian: dt must be positive");
  const AnisotropyParams free{};
  Rng rng(seed, stream);
  const double sq = std::sqrt(dt);
  std::vector<Vec3> path;
  path.reserve(n + 1);
  path.push_back(v0);
  for (std::size_t k = 0; k < n; ++k) path.push_back(sde_step_B(path.back(), free, 1.0, sq * rng.normal3(), dt));
  return path;
}

}  // namespace sllg
