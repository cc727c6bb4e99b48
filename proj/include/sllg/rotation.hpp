#pragma once

#include <cmath>

#include "sllg/vec3.hpp"

namespace sllg {

/// Exact flow of v' = (v x e) theta' from 0 to theta, for a unit axis e, with
/// c = cos(theta) and s = sin(theta) precomputed.
constexpr Vec3 rodrigues(const Vec3& v, const Vec3& e, double c, double s) {
  return c * v + s * cross(v, e) + ((1.0 - c) * dot(e, v)) * e;
}

inline Vec3 rodrigues(const Vec3& v, const Vec3& e, double theta) {
  return rodrigues(v, e, std::cos(theta), std::sin(theta));
}

/// Rotation matrix R with R v = rodrigues(v, e, theta).
inline Mat3 rodrigues_matrix(const Vec3& e, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // Columns are the images of the basis vectors.
  const Vec3 c0 = rodrigues({1, 0, 0}, e, c, s);
  const Vec3 c1 = rodrigues({0, 1, 0}, e, c, s);
  const Vec3 c2 = rodrigues({0, 0, 1}, e, c, s);
  return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
}

/// The flow of v' = v x omega over unit time: rotation by |omega| about omega / |omega|.
inline Vec3 rotate_by(const Vec3& v, const Vec3& omega) {
  const double angle = norm(omega);
  if (angle == 0.0) return v;
  return rodrigues(v, omega / angle, angle);
}

}  // namespace sllg
