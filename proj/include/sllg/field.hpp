#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sllg/errors.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

using VectorField = std::vector<Vec3>;

/// Uniform grid on the closed interval [0, length]; both endpoints are nodes.
class Grid1D {
 public:
  Grid1D(std::size_t n_points, double length) : n_points_(n_points), length_(length) {
    if (n_points < 3) throw ConfigError("Grid1D needs at least 3 nodes");
    if (!(length > 0.0) || !std::isfinite(length))
      throw ConfigError("Grid1D length must be positive and finite");
    dx_ = length / static_cast<double>(n_points - 1);
  }

  std::size_t n_points() const { return n_points_; }
  double length() const { return length_; }
  double dx() const { return dx_; }
  double node(std::size_t i) const { return static_cast<double>(i) * dx_; }

  /// Trapezoid weight of node i.
  double weight(std::size_t i) const {
    return (i == 0 || i + 1 == n_points_) ? 0.5 * dx_ : dx_;
  }

  /// Sharp Poincare constant of the interval, |D| / pi.
  double poincare_constant() const { return length_ / std::numbers::pi; }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  std::size_t n_points_;
  double length_;
  double dx_;
};

/// A sphere-valued map on a grid: |values[i]| = 1 at every node.
class SphereField {
 public:
  static constexpr double kUnitTolerance = 1e-12;

  /// Takes values that must already be unit vectors.
  SphereField(Grid1D grid, VectorField values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_points())
      throw ConfigError("SphereField: value count does not match grid");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!is_finite(values_[i]))
        throw ConfigError("SphereField: non-finite value at node " + std::to_string(i));
      if (std::abs(norm(values_[i]) - 1.0) > kUnitTolerance)
        throw ConfigError("SphereField: value off the unit sphere at node " + std::to_string(i));
    }
  }

  /// Projects arbitrary nonzero vectors onto the sphere.
  static SphereField normalized(Grid1D grid, VectorField values) {
    for (auto& v : values) {
      const double n = norm(v);
      if (!(n > 0.0)) throw ConfigError("SphereField::normalized: zero vector");
      v = v / n;
    }
    return SphereField(grid, std::move(values));
  }

  static SphereField constant(Grid1D grid, const Vec3& v) {
    return normalized(grid, VectorField(grid.n_points(), v));
  }

  /// Samples f at the nodes and normalizes.
  static SphereField from_function(Grid1D grid, const std::function<Vec3(double)>& f) {
    VectorField values(grid.n_points());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(grid.node(i));
    return normalized(grid, std::move(values));
  }

  const Grid1D& grid() const { return grid_; }
  std::span<const Vec3> values() const { return values_; }
  const Vec3& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Largest | |u_i| - 1 | over the nodes.
  double max_norm_deviation() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(norm(v) - 1.0));
    return m;
  }

 private:
  friend class FieldMutator;
  Grid1D grid_;
  VectorField values_;
};

/// Write access for time steppers that maintain the unit-norm invariant themselves.
class FieldMutator {
 public:
  static VectorField& values(SphereField& f) { return f.values_; }
};

/// How derivative stencils treat the two boundary nodes.
enum class BoundaryClosure {
  /// Ghost node mirrored across the boundary: discrete Neumann condition.
  kMirrored,
  /// Second-order one-sided stencils; for fields that do not satisfy Neumann.
  kOneSided,
};

/// Central differences; the mirrored closure makes both endpoint values exactly zero.
inline VectorField first_derivative(std::span<const Vec3> u, const Grid1D& grid,
                                    BoundaryClosure closure = BoundaryClosure::kMirrored) {
  const std::size_t n = u.size();
  const double inv2dx = 0.5 / grid.dx();
  VectorField d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) * inv2dx;
  if (closure == BoundaryClosure::kOneSided) {
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2dx;
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2dx;
  }
  return d;
}

inline VectorField first_derivative(const SphereField& u,
                                    BoundaryClosure closure = BoundaryClosure::kMirrored) {
  return first_derivative(u.values(), u.grid(), closure);
}

/// Three-point Laplacian stencil into a caller-owned buffer (hot path of the steppers).
inline void second_derivative_into(std::span<const Vec3> u, double dx, std::span<Vec3> out) {
  const std::size_t n = u.size();
  const double inv = 1.0 / (dx * dx);
  out[0] = (u[1] - u[0]) * (2.0 * inv);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] + u[i - 1] - 2.0 * u[i]) * inv;
  out[n - 1] = (u[n - 2] - u[n - 1]) * (2.0 * inv);
}

inline VectorField second_derivative(std::span<const Vec3> u, const Grid1D& grid,
                                     BoundaryClosure closure = BoundaryClosure::kMirrored) {
  const std::size_t n = u.size();
  VectorField d(n);
  second_derivative_into(u, grid.dx(), d);
  if (closure == BoundaryClosure::kOneSided) {
    const double inv = 1.0 / (grid.dx() * grid.dx());
    if (n >= 4) {
      d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * inv;
      d[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) * inv;
    } else {
      d[0] = d[n - 1] = (u[0] + u[2] - 2.0 * u[1]) * inv;
    }
  }
  return d;
}

inline VectorField second_derivative(const SphereField& u,
                                     BoundaryClosure closure = BoundaryClosure::kMirrored) {
  return second_derivative(u.values(), u.grid(), closure);
}

// ---- quadrature -----------------------------------------------------------

/// Composite trapezoid rule of nodal samples.
inline double trapezoid(std::span<const double> f, const Grid1D& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.weight(i) * f[i];
  return s;
}

inline Vec3 trapezoid(std::span<const Vec3> f, const Grid1D& grid) {
  Vec3 s;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.weight(i) * f[i];
  return s;
}

/// ||f||_{L^2}^2 by trapezoid.
inline double l2_norm_sq(std::span<const Vec3> f, const Grid1D& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.weight(i) * norm_sq(f[i]);
  return s;
}

inline double l2_norm(std::span<const Vec3> f, const Grid1D& grid) {
  return std::sqrt(l2_norm_sq(f, grid));
}

/// ||f||_{L^p}^p by trapezoid.
inline double lp_norm_pow(std::span<const Vec3> f, const Grid1D& grid, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.weight(i) * std::pow(norm(f[i]), p);
  return s;
}

/// ||d_x u||_{L^2}^2 of the piecewise-linear interpolant: sum over cells of |u_{i+1}-u_i|^2/dx.
///
/// This is the discrete Dirichlet energy whose lumped-L^2 gradient is the mirrored
/// three-point Laplacian, so the dissipation identity of the flow holds with it exactly
/// in the time-continuous limit.
inline double grad_norm_sq(std::span<const Vec3> u, const Grid1D& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) s += norm_sq(u[i + 1] - u[i]);
  return s / grid.dx();
}

inline double grad_norm_sq(const SphereField& u) { return grad_norm_sq(u.values(), u.grid()); }

/// H^1 norm squared: L^2 part by trapezoid plus the cell-based gradient part.
inline double h1_norm_sq(std::span<const Vec3> u, const Grid1D& grid) {
  return l2_norm_sq(u, grid) + grad_norm_sq(u, grid);
}

/// ||u x d_xx u||_{L^2}^2 with the mirrored Laplacian.
inline double cross_laplacian_norm_sq(const SphereField& u) {
  const auto lap = second_derivative(u);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u.grid().weight(i) * norm_sq(cross(u[i], lap[i]));
  return s;
}

/// (1/|D|) \int u dx.
inline Vec3 spatial_average(std::span<const Vec3> u, const Grid1D& grid) {
  return trapezoid(u, grid) / grid.length();
}

inline Vec3 spatial_average(const SphereField& u) { return spatial_average(u.values(), u.grid()); }

/// max_i |u_i . d_x u_i| with the mirrored first derivative.
inline double orthogonality_residual(std::span<const Vec3> u, const Grid1D& grid) {
  const auto d = first_derivative(u, grid);
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(dot(u[i], d[i])));
  return m;
}

inline double orthogonality_residual(const SphereField& u) {
  return orthogonality_residual(u.values(), u.grid());
}

/// Both sides of ||u_xx||^2 = ||u_x||_{L^4}^4 + ||u x u_xx||^2.
struct LaplacianIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return std::abs(lhs - rhs); }
};

/// Evaluates the identity with one-sided boundary closures so that it converges at
/// second order for smooth unit fields whether or not they satisfy Neumann conditions.
inline LaplacianIdentity laplacian_identity(const SphereField& u,
                                            BoundaryClosure closure = BoundaryClosure::kOneSided) {
  const auto d1 = first_derivative(u, closure);
  const auto d2 = second_derivative(u, closure);
  const Grid1D& g = u.grid();
  LaplacianIdentity out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = g.weight(i);
    const double grad_sq = norm_sq(d1[i]);
    out.lhs += w * norm_sq(d2[i]);
    out.rhs += w * (grad_sq * grad_sq + norm_sq(cross(u[i], d2[i])));
  }
  return out;
}

inline double laplacian_identity_residual(const SphereField& u,
                                          BoundaryClosure closure = BoundaryClosure::kOneSided) {
  return laplacian_identity(u, closure).residual();
}

/// Both sides of the Poincare-Wirtinger inequality ||u - <u>|| <= C_p ||u_x||.
struct PoincareWirtinger {
  double deviation = 0.0;  ///< ||u - <u>||_{L^2}
  double bound = 0.0;      ///< (|D|/pi) ||u_x||_{L^2}
};

inline PoincareWirtinger poincare_wirtinger(std::span<const Vec3> u, const Grid1D& grid) {
  const Vec3 mean = spatial_average(u, grid);
  double dev = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dev += grid.weight(i) * norm_sq(u[i] - mean);
  return {std::sqrt(dev), grid.poincare_constant() * std::sqrt(grad_norm_sq(u, grid))};
}

}  // namespace sllg
