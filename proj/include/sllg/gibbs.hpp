#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sllg/anisotropy.hpp"
#include "sllg/errors.hpp"
#include "sllg/rng.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

struct GibbsSpec {
  double lambda2 = 1.0;
  double h2 = 1.0;
  AnisotropyParams aniso{};
  double domain_length = 1.0;

  void validate() const {
    if (!(lambda2 > 0.0)) throw ConfigError("GibbsSpec: lambda2 must be positive");
    if (h2 == 0.0 || !std::isfinite(h2)) throw ConfigError("GibbsSpec: h2 must be nonzero");
    if (!(domain_length > 0.0)) throw ConfigError("GibbsSpec: domain length must be positive");
    aniso.validate();
  }

  /// Coefficient beta in exp(-beta g'(v).v): (lambda2 / h2) |D|.
  double beta() const { return lambda2 / h2 * domain_length; }
};

/// Point on the sphere with height z and longitude phi.
inline Vec3 sphere_point(double z, double phi) {
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

/// Normalized density exp(-beta g'(v).v) / Z with respect to surface measure.
/// Z comes from midpoint quadrature on an equal-area z x phi grid.
class GibbsDensity {
 public:
  static constexpr std::size_t kZPanels = 8;
  static constexpr std::size_t kPhiNodes = 256;

  explicit GibbsDensity(GibbsSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    // Gauss panels in z, periodic trapezoid in phi.
    using boost::math::quadrature::gauss;
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(kPhiNodes);
    double total = 0.0;
    for (std::size_t panel = 0; panel < kZPanels; ++panel) {
      const double z0 = -1.0 + 2.0 * static_cast<double>(panel) / static_cast<double>(kZPanels);
      total += gauss<double, 30>::integrate(
          [&](double z) {
            double s = 0.0;
            for (std::size_t b = 0; b < kPhiNodes; ++b)
              s += unnormalized(sphere_point(z, -std::numbers::pi + static_cast<double>(b) * dphi));
            return s * dphi;
          },
          z0, z0 + 2.0 / static_cast<double>(kZPanels));
    }
    log_norm_ = std::log(total);
    if (!std::isfinite(log_norm_)) throw ConfigError("GibbsDensity: non-finite normalization");

    // Envelope: g'(v).v = (Av).v + b.v lies in [l_min - |b|, l_max + |b|].
    const auto ev = symmetric_eigenvalues(symmetric_part(spec_.aniso.A));
    const double lo = ev[0] - norm(spec_.aniso.b);
    const double hi = ev[2] + norm(spec_.aniso.b);
    max_log_ = std::max(-spec_.beta() * lo, -spec_.beta() * hi) - log_norm_;

    const Mat3& A = spec_.aniso.A;
    axisymmetric_ = A(0, 0) == A(1, 1) && A(0, 1) == 0.0 && A(1, 0) == 0.0 && A(0, 2) == 0.0 &&
                    A(2, 0) == 0.0 && A(1, 2) == 0.0 && A(2, 1) == 0.0 && spec_.aniso.b.x == 0.0 &&
                    spec_.aniso.b.y == 0.0;
  }

  const GibbsSpec& spec() const { return spec_; }

  /// g'(v).v.
  double energy_density(const Vec3& v) const { return dot(spec_.aniso.g_prime(v), v); }

  double log_density(const Vec3& v) const { return -spec_.beta() * energy_density(v) - log_norm_; }

  double operator()(const Vec3& v) const {
    const double e = log_density(v);
    if (!std::isfinite(e)) throw ConfigError("GibbsDensity: non-finite exponent");
    return std::exp(e);
  }

  /// Upper bound of the density over the sphere.
  double max_density() const { return std::exp(max_log_); }

  /// Density of z = v_3: the longitude integral of the surface density.
  double z_marginal(double z) const {
    if (axisymmetric_) return 2.0 * std::numbers::pi * (*this)(sphere_point(z, 0.0));
    // Periodic integrand: the trapezoid rule converges geometrically.
    constexpr int m = 256;
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += (*this)(sphere_point(z, -std::numbers::pi + 2.0 * std::numbers::pi * k / m));
    return s * 2.0 * std::numbers::pi / m;
  }

  /// P(v_3 <= z).
  double z_cdf(double z) const {
    if (z <= -1.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [this](double t) { return z_marginal(t); }, -1.0, z, 15, 1e-13);
  }

  /// P(v_3 <= z) by linear interpolation in a table of n_cells cumulative Gauss integrals;
  /// for evaluating the CDF at many points.
  std::function<double(double)> tabulated_z_cdf(std::size_t n_cells = 4096) const {
    using boost::math::quadrature::gauss;
    const double h = 2.0 / static_cast<double>(n_cells);
    std::vector<double> table(n_cells + 1, 0.0);
    for (std::size_t k = 0; k < n_cells; ++k) {
      const double z0 = -1.0 + h * static_cast<double>(k);
      table[k + 1] = table[k] + gauss<double, 10>::integrate([this](double t) { return z_marginal(t); }, z0, z0 + h);
    }
    return [table = std::move(table), h, n_cells](double z) {
      if (z <= -1.0) return 0.0;
      if (z >= 1.0) return 1.0;
      const double x = (z + 1.0) / h;
      const std::size_t k = std::min(n_cells - 1, static_cast<std::size_t>(x));
      const double w = x - static_cast<double>(k);
      return std::clamp((1.0 - w) * table[k] + w * table[k + 1], 0.0, 1.0);
    };
  }

  /// Probability of the cell [z0, z1] x [phi0, phi1].
  double cell_mass(double z0, double z1, double phi0, double phi1) const {
    using boost::math::quadrature::gauss;
    return gauss<double, 20>::integrate(
        [&](double z) {
          return gauss<double, 20>::integrate([&](double phi) { return (*this)(sphere_point(z, phi)); }, phi0,
                                              phi1);
        },
        z0, z1);
  }

  /// Masses of the equal-area bins, band-major: index band * n_phi + sector.
  std::vector<double> bin_masses(std::size_t n_z_bands, std::size_t n_phi) const {
    std::vector<double> m(n_z_bands * n_phi);
    for (std::size_t a = 0; a < n_z_bands; ++a) {
      const double z0 = -1.0 + 2.0 * static_cast<double>(a) / static_cast<double>(n_z_bands);
      const double z1 = -1.0 + 2.0 * static_cast<double>(a + 1) / static_cast<double>(n_z_bands);
      for (std::size_t b = 0; b < n_phi; ++b) {
        const double p0 = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(n_phi);
        const double p1 = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(b + 1) / static_cast<double>(n_phi);
        m[a * n_phi + b] = cell_mass(z0, z1, p0, p1);
      }
    }
    return m;
  }

  /// Exact draw by rejection from the uniform law with the eigenvalue envelope.
  Vec3 sample(Rng& rng) const {
    const double env = max_density();
    for (;;) {
      const Vec3 v = rng.uniform_on_sphere();
      if (rng.uniform() * env <= (*this)(v)) return v;
    }
  }

 private:
  double unnormalized(const Vec3& v) const { return std::exp(-spec_.beta() * energy_density(v)); }

  GibbsSpec spec_;
  double log_norm_ = 0.0;
  double max_log_ = 0.0;
  /// Density depends on z only.
  bool axisymmetric_ = false;
};

}  // namespace sllg
