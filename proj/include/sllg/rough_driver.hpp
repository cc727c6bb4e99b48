#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sllg/brownian.hpp"
#include "sllg/errors.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

/// The antisymmetric matrix of v -> v x dw.
constexpr Mat3 first_level(const Vec3& dw) {
  return {{0.0, dw.z, -dw.y, -dw.z, 0.0, dw.x, dw.y, -dw.x, 0.0}};
}

/// Iterated integrals w^{ij}_{s,t} = \int_s^t (w^i_r - w^i_s) dw^j_r of the
/// piecewise-linear interpolation of a 3D path between fine steps [k0, k1).
///
/// On each linear piece the integral is exact: (w^i_k - w^i_s) d^j + d^i d^j / 2,
/// i.e. the midpoint (Stratonovich) rule.
inline Mat3 iterated_integrals(const BrownianPath& path, std::size_t k0, std::size_t k1) {
  Mat3 w;
  Vec3 offset{};
  for (std::size_t k = k0; k < k1; ++k) {
    const Vec3 d = path.increment3(k);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) w(i, j) += (offset[i] + 0.5 * d[i]) * d[j];
    offset += d;
  }
  return w;
}

/// Second level assembled from the iterated integrals:
///   [ -w33-w22   w12       w13     ]
///   [  w21      -w33-w11   w23     ]
///   [  w31       w32      -w22-w11 ]
inline Mat3 second_level_from_iterated(const Mat3& w) {
  return {{-w(2, 2) - w(1, 1), w(0, 1), w(0, 2),
           w(1, 0), -w(2, 2) - w(0, 0), w(1, 2),
           w(2, 0), w(2, 1), -w(1, 1) - w(0, 0)}};
}

/// First and second level of the cross-product rough driver over [t_k0, t_k1].
struct DriverIncrement {
  Mat3 W;
  Mat3 WW;
};

inline DriverIncrement driver_increment(const BrownianPath& path, std::size_t k0, std::size_t k1) {
  Vec3 dw{};
  for (std::size_t k = k0; k < k1; ++k) dw += path.increment3(k);
  return {first_level(dw), second_level_from_iterated(iterated_integrals(path, k0, k1))};
}

/// (W, WW) on every interval of a coarse partition of the fine step grid.
struct RoughDriverSample {
  /// Coarse partition as fine step indices, strictly increasing.
  std::vector<std::size_t> partition;
  /// Times of the partition points.
  std::vector<double> times;
  /// One entry per coarse interval [partition[m], partition[m+1]].
  std::vector<Mat3> W;
  std::vector<Mat3> WW;

  std::size_t n_intervals() const { return W.size(); }
};

/// Builds the rough driver on a coarse partition whose points are fine step indices.
inline RoughDriverSample second_level(const BrownianPath& path,
                                      std::span<const std::size_t> coarse_partition) {
  if (path.dimension != 3) throw ConfigError("second_level: needs a 3D path");
  if (coarse_partition.size() < 2) throw ConfigError("second_level: partition needs two points");
  for (std::size_t m = 0; m + 1 < coarse_partition.size(); ++m)
    if (coarse_partition[m] >= coarse_partition[m + 1])
      throw ConfigError("second_level: partition must be strictly increasing");
  if (coarse_partition.back() > path.n_steps())
    throw ConfigError("second_level: partition point beyond the fine step grid");

  RoughDriverSample out;
  out.partition.assign(coarse_partition.begin(), coarse_partition.end());
  for (auto k : coarse_partition) out.times.push_back(static_cast<double>(k) * path.dt);
  for (std::size_t m = 0; m + 1 < coarse_partition.size(); ++m) {
    const auto inc = driver_increment(path, coarse_partition[m], coarse_partition[m + 1]);
    out.W.push_back(inc.W);
    out.WW.push_back(inc.WW);
  }
  return out;
}

/// Largest |entry| of a matrix, for residual reporting.
inline double max_abs(const Mat3& m) { return m.max_abs_entry(); }

/// |W + W^T|_max.
inline double antisymmetry_residual(const Mat3& W) { return max_abs(W + W.transposed()); }

/// |Sym(WW) - W W / 2|_max.
inline double geometric_residual(const Mat3& W, const Mat3& WW) {
  return max_abs(symmetric_part(WW) - 0.5 * (W * W));
}

/// |WW_{s,t} - WW_{s,u} - WW_{u,t} - W_{u,t} W_{s,u}|_max with every term computed
/// directly from the fine path.
inline double chen_residual(const BrownianPath& path, std::size_t s, std::size_t u, std::size_t t) {
  const auto st = driver_increment(path, s, t);
  const auto su = driver_increment(path, s, u);
  const auto ut = driver_increment(path, u, t);
  return max_abs(st.WW - su.WW - ut.WW - ut.W * su.W);
}

/// Dyadic lower bound of the p-variation: the maximum over depths d <= max_depth of
/// (sum |h(t_{k+1}) - h(t_k)|^p)^{1/p} on the partition of the index range into 2^d
/// pieces. Nondecreasing in max_depth.
template <class T, class Norm>
double p_variation(std::span<const T> path, double p, int max_depth, Norm&& dist) {
  if (!(p >= 1.0)) throw ConfigError("p_variation: p must be at least 1");
  if (path.size() < 2) return 0.0;
  const std::size_t last = path.size() - 1;
  double best = 0.0;
  for (int depth = 0; depth <= max_depth; ++depth) {
    const std::size_t pieces = std::size_t{1} << std::min(depth, 62);
    double sum = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 1; k <= pieces; ++k) {
      const std::size_t idx = static_cast<std::size_t>(
          (static_cast<unsigned __int128>(k) * last) / pieces);
      if (idx == prev) continue;
      sum += std::pow(dist(path[idx], path[prev]), p);
      prev = idx;
    }
    best = std::max(best, std::pow(sum, 1.0 / p));
    if (pieces >= last) break;
  }
  return best;
}

inline double p_variation(std::span<const double> path, double p, int max_depth) {
  return p_variation(path, p, max_depth, [](double a, double b) { return std::abs(a - b); });
}

inline double p_variation(std::span<const Vec3> path, double p, int max_depth) {
  return p_variation(path, p, max_depth, [](const Vec3& a, const Vec3& b) { return norm(a - b); });
}

/// Ito drift supplement of d x = h x x (circle) dW with a 3D Brownian motion W:
/// half of c(x) = -2x, scaled by h^2.
constexpr Vec3 ito_correction(const Vec3& x, double intensity_sq) { return -intensity_sq * x; }

/// Ito drift supplement of d x = x x h (circle) dB with a scalar Brownian motion B:
/// (1/2) (x x h) x h.
constexpr Vec3 ito_correction_axis(const Vec3& x, const Vec3& h) {
  return 0.5 * cross(cross(x, h), h);
}

}  // namespace sllg
