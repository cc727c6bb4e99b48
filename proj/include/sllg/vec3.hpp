#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

namespace sllg {

/// A vector in R^3. Plain aggregate so arrays of it stay contiguous.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double norm_sq(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm_sq(a)); }

inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

/// Row-major 3x3 real matrix.
struct Mat3 {
  std::array<double, 9> a{};

  static constexpr Mat3 zero() { return {}; }
  static constexpr Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  static constexpr Mat3 diagonal(double d0, double d1, double d2) {
    return {{d0, 0, 0, 0, d1, 0, 0, 0, d2}};
  }

  constexpr double operator()(std::size_t r, std::size_t c) const { return a[3 * r + c]; }
  constexpr double& operator()(std::size_t r, std::size_t c) { return a[3 * r + c]; }

  constexpr Mat3 transposed() const {
    return {{a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]}};
  }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) a[i] += o.a[i];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) a[i] -= o.a[i];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& v : a) v *= s;
    return *this;
  }

  /// Largest |A_ij|.
  double max_abs_entry() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }

  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
constexpr Mat3 operator*(double s, Mat3 m) { return m *= s; }

constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {m.a[0] * v.x + m.a[1] * v.y + m.a[2] * v.z,
          m.a[3] * v.x + m.a[4] * v.y + m.a[5] * v.z,
          m.a[6] * v.x + m.a[7] * v.y + m.a[8] * v.z};
}

constexpr Mat3 operator*(const Mat3& l, const Mat3& r) {
  Mat3 out;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += l(i, k) * r(k, j);
      out(i, j) = s;
    }
  return out;
}

constexpr Mat3 symmetric_part(const Mat3& m) { return 0.5 * (m + m.transposed()); }

inline double max_abs_entry(const Mat3& m) { return m.max_abs_entry(); }

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
inline std::array<double, 3> symmetric_eigenvalues(Mat3 m) {
  for (int sweep = 0; sweep < 50; ++sweep) {
    const double off = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < 2; ++p) {
      for (std::size_t q = p + 1; q < 3; ++q) {
        if (std::abs(m(p, q)) < 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat3 rot = Mat3::identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        m = rot.transposed() * m * rot;
      }
    }
  }
  std::array<double, 3> ev{m(0, 0), m(1, 1), m(2, 2)};
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace sllg
