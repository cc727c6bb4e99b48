#pragma once

#include <cstdint>
#include <random>

#include "sllg/vec3.hpp"

namespace sllg {

/// SplitMix64 finalizer; used to derive well-separated stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Gaussian source for one trajectory. The stream is a pure function of
/// (seed, stream_index), so ensembles are reproducible for any worker count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_index = 0) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream_index + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

  Vec3 normal3() {
    const double x = normal();
    const double y = normal();
    const double z = normal();
    return {x, y, z};
  }

  /// Uniform in [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  /// Uniform point on the unit sphere.
  Vec3 uniform_on_sphere() {
    const double z = 2.0 * uniform() - 1.0;
    const double phi = 2.0 * 3.14159265358979323846 * uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sllg
