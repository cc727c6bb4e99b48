#pragma once

#include <algorithm>
#include <vector>

#include "sllg/errors.hpp"
#include "sllg/field.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

/// Shape A: W_t(x) = h1(x) B_t with a scalar Brownian motion.
/// Shape B: W_t(x) = h2(x) B_t with a 3D Brownian motion.
enum class NoiseKind { kShapeA, kShapeB };

class NoiseShape {
 public:
  static NoiseShape shape_a(std::vector<Vec3> h1) {
    for (const auto& v : h1)
      if (!is_finite(v)) throw ConfigError("noise profile h1 must be finite");
    NoiseShape s;
    s.kind_ = NoiseKind::kShapeA;
    s.h1_ = std::move(h1);
    s.constant_ = std::all_of(s.h1_.begin(), s.h1_.end(), [&](const Vec3& v) { return v == s.h1_.front(); });
    return s;
  }

  static NoiseShape shape_b(std::vector<double> h2) {
    for (double v : h2)
      if (!std::isfinite(v)) throw ConfigError("noise profile h2 must be finite");
    NoiseShape s;
    s.kind_ = NoiseKind::kShapeB;
    s.h2_ = std::move(h2);
    const auto [lo, hi] = std::minmax_element(s.h2_.begin(), s.h2_.end());
    s.constant_ = (*hi - *lo) == 0.0;
    return s;
  }

  static NoiseShape constant_a(const Grid1D& grid, const Vec3& h1) {
    return shape_a(std::vector<Vec3>(grid.n_points(), h1));
  }
  static NoiseShape constant_b(const Grid1D& grid, double h2) {
    return shape_b(std::vector<double>(grid.n_points(), h2));
  }

  NoiseKind kind() const { return kind_; }
  const std::vector<Vec3>& h1() const { return h1_; }
  const std::vector<double>& h2() const { return h2_; }
  std::size_t size() const { return kind_ == NoiseKind::kShapeA ? h1_.size() : h2_.size(); }

  /// max - min of the profile is exactly zero.
  bool spatially_constant() const { return constant_; }

  /// Dimension of the driving Brownian motion.
  int brownian_dimension() const { return kind_ == NoiseKind::kShapeA ? 1 : 3; }

  /// ||d_x h||_{L^2}^2 of the piecewise-linear profile.
  double grad_norm_sq(const Grid1D& grid) const {
    double s = 0.0;
    if (kind_ == NoiseKind::kShapeA) {
      for (std::size_t i = 0; i + 1 < h1_.size(); ++i) s += norm_sq(h1_[i + 1] - h1_[i]);
    } else {
      for (std::size_t i = 0; i + 1 < h2_.size(); ++i) {
        const double d = h2_[i + 1] - h2_[i];
        s += d * d;
      }
    }
    return s / grid.dx();
  }

 private:
  NoiseKind kind_ = NoiseKind::kShapeB;
  std::vector<Vec3> h1_;
  std::vector<double> h2_;
  bool constant_ = true;
};

}  // namespace sllg
