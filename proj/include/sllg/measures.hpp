#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "sllg/errors.hpp"
#include "sllg/spde.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

struct BinIndex {
  std::size_t band = 0;
  std::size_t sector = 0;
  friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

/// Histogram on the sphere over bins uniform in z = cos(theta) and in longitude, which
/// makes every bin the same area 4 pi / (n_z_bands n_phi).
class EmpiricalSphereMeasure {
 public:
  EmpiricalSphereMeasure(std::size_t n_z_bands, std::size_t n_phi)
      : n_z_(n_z_bands), n_phi_(n_phi), counts_(n_z_bands * n_phi, 0) {
    if (n_z_bands == 0 || n_phi == 0) throw ConfigError("EmpiricalSphereMeasure: need at least one bin");
  }

  std::size_t n_z_bands() const { return n_z_; }
  std::size_t n_phi() const { return n_phi_; }
  std::size_t n_bins() const { return counts_.size(); }
  std::uint64_t total() const { return total_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t count(std::size_t band, std::size_t sector) const { return counts_[band * n_phi_ + sector]; }

  double bin_area() const { return 4.0 * std::numbers::pi / static_cast<double>(n_bins()); }

  double z_edge(std::size_t band) const {
    return -1.0 + 2.0 * static_cast<double>(band) / static_cast<double>(n_z_);
  }
  double phi_edge(std::size_t sector) const {
    return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(sector) / static_cast<double>(n_phi_);
  }

  /// The pole (0, 0, 1) has atan2(0, 0) = 0, which falls in the sector starting at phi = 0.
  BinIndex bin_of(const Vec3& v) const {
    const auto clamp = [](double x, std::size_t n) {
      if (!(x >= 0.0)) return std::size_t{0};
      return std::min(static_cast<std::size_t>(x), n - 1);
    };
    const double zb = (v.z + 1.0) / 2.0 * static_cast<double>(n_z_);
    const double pb = (std::atan2(v.y, v.x) + std::numbers::pi) / (2.0 * std::numbers::pi) * static_cast<double>(n_phi_);
    return {clamp(zb, n_z_), clamp(pb, n_phi_)};
  }

  void accumulate(const Vec3& v, std::uint64_t weight = 1) {
    const auto b = bin_of(v);
    counts_[b.band * n_phi_ + b.sector] += weight;
    total_ += weight;
  }

  void merge(const EmpiricalSphereMeasure& other) {
    if (other.n_z_ != n_z_ || other.n_phi_ != n_phi_) throw ConfigError("merge: bin layouts differ");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
  }

  friend EmpiricalSphereMeasure merge(EmpiricalSphereMeasure a, const EmpiricalSphereMeasure& b) {
    a.merge(b);
    return a;
  }

  double empirical_mass(std::size_t bin) const {
    return total_ == 0 ? 0.0 : static_cast<double>(counts_[bin]) / static_cast<double>(total_);
  }

 private:
  std::size_t n_z_;
  std::size_t n_phi_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct MeasureDistanceReport {
  double tv = 0.0;
  double ks_z = 0.0;
  std::uint64_t sample_count = 0;
};

/// Bin masses of the uniform law.
inline std::vector<double> uniform_bin_masses(std::size_t n_z_bands, std::size_t n_phi) {
  return std::vector<double>(n_z_bands * n_phi, 1.0 / static_cast<double>(n_z_bands * n_phi));
}

/// (1/2) sum |empirical - reference| over bins.
inline double tv_distance(const EmpiricalSphereMeasure& m, std::span<const double> reference_mass) {
  if (m.total() == 0) throw ConfigError("tv_distance: empty measure");
  if (reference_mass.size() != m.n_bins()) throw ConfigError("tv_distance: reference has wrong bin count");
  double s = 0.0;
  for (std::size_t i = 0; i < m.n_bins(); ++i) s += std::abs(m.empirical_mass(i) - reference_mass[i]);
  return std::min(1.0, 0.5 * s);
}

/// Two-sided Kolmogorov-Smirnov statistic sup_z |F_n(z) - F(z)| of raw samples against a
/// continuous reference CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ConfigError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    ks = std::max({ks, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return ks;
}

inline double uniform_z_cdf(double z) { return std::clamp((z + 1.0) / 2.0, 0.0, 1.0); }

/// TV over the bins of m and KS of the raw z-samples.
inline MeasureDistanceReport distance_report(const EmpiricalSphereMeasure& m, std::span<const double> reference_mass,
                                             std::vector<double> z_samples,
                                             const std::function<double(double)>& z_cdf) {
  return {tv_distance(m, reference_mass), ks_statistic(std::move(z_samples), z_cdf), m.total()};
}

inline void write_measure_csv(std::ostream& os, const EmpiricalSphereMeasure& m, std::span<const double> reference_mass) {
  os << "band,sector,count,area,empirical_mass,reference_mass\n";
  const std::string area = format_double(m.bin_area());
  for (std::size_t a = 0; a < m.n_z_bands(); ++a)
    for (std::size_t b = 0; b < m.n_phi(); ++b) {
      const std::size_t i = a * m.n_phi() + b;
      os << a << ',' << b << ',' << m.count(a, b) << ',' << area << ',' << format_double(m.empirical_mass(i)) << ','
         << format_double(reference_mass[i]) << '\n';
    }
}

}  // namespace sllg
