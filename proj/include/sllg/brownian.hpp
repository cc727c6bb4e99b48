#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "sllg/errors.hpp"
#include "sllg/rng.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

/// Increments of a 1D or 3D Brownian path on a uniform time grid.
///
/// Increments are stored step-major: step k occupies
/// [k * dimension, (k + 1) * dimension).
struct BrownianPath {
  int dimension = 3;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> increments;

  std::size_t n_steps() const { return increments.size() / static_cast<std::size_t>(dimension); }

  double scalar_increment(std::size_t k) const { return increments[k]; }

  Vec3 increment3(std::size_t k) const {
    const double* p = increments.data() + 3 * k;
    return {p[0], p[1], p[2]};
  }

  /// Path values w(t_k), k = 0..n_steps, for a 3D path started at the origin.
  std::vector<Vec3> positions3() const {
    std::vector<Vec3> w(n_steps() + 1);
    for (std::size_t k = 0; k < n_steps(); ++k) w[k + 1] = w[k] + increment3(k);
    return w;
  }

  std::vector<double> positions1() const {
    std::vector<double> w(n_steps() + 1, 0.0);
    for (std::size_t k = 0; k < n_steps(); ++k) w[k + 1] = w[k] + increments[k];
    return w;
  }

  /// A 3D path with prescribed increments (deterministic test paths, replays).
  static BrownianPath from_increments3(double dt, const std::vector<Vec3>& inc) {
    BrownianPath p;
    p.dimension = 3;
    p.dt = dt;
    p.increments.reserve(3 * inc.size());
    for (const auto& v : inc) {
      p.increments.push_back(v.x);
      p.increments.push_back(v.y);
      p.increments.push_back(v.z);
    }
    return p;
  }
};

/// Samples n_steps Gaussian increments of variance dt per component.
/// stream selects an independent sub-stream of the same seed.
inline BrownianPath sample_brownian(std::uint64_t seed, double dt, std::size_t n_steps,
                                    int dimension, std::uint64_t stream = 0) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sample_brownian: dt must be positive");
  if (n_steps < 1) throw ConfigError("sample_brownian: n_steps must be at least 1");
  if (dimension != 1 && dimension != 3)
    throw ConfigError("sample_brownian: dimension must be 1 or 3");
  BrownianPath p;
  p.dimension = dimension;
  p.dt = dt;
  p.seed = seed;
  p.increments.resize(n_steps * static_cast<std::size_t>(dimension));
  Rng rng(seed, stream);
  const double s = std::sqrt(dt);
  for (auto& x : p.increments) x = s * rng.normal();
  return p;
}

// ---- binary replay format ---------------------------------------------------
//
// Little-endian throughout:
//   u64 dimension | f64 dt | u64 n_steps | u64 seed | f64 increments[n_steps * dimension]

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw ConfigError("brownian dump: truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& os, double d) { put_u64(os, std::bit_cast<std::uint64_t>(d)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

inline void write_brownian(std::ostream& os, const BrownianPath& p) {
  detail::put_u64(os, static_cast<std::uint64_t>(p.dimension));
  detail::put_f64(os, p.dt);
  detail::put_u64(os, p.n_steps());
  detail::put_u64(os, p.seed);
  for (double x : p.increments) detail::put_f64(os, x);
}

inline BrownianPath read_brownian(std::istream& is) {
  BrownianPath p;
  const auto dim = detail::get_u64(is);
  if (dim != 1 && dim != 3) throw ConfigError("brownian dump: bad dimension");
  p.dimension = static_cast<int>(dim);
  p.dt = detail::get_f64(is);
  const auto n = detail::get_u64(is);
  p.seed = detail::get_u64(is);
  p.increments.resize(n * dim);
  for (auto& x : p.increments) x = detail::get_f64(is);
  return p;
}

}  // namespace sllg
