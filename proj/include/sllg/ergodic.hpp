#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sllg/anisotropy.hpp"
#include "sllg/errors.hpp"
#include "sllg/gibbs.hpp"
#include "sllg/measures.hpp"
#include "sllg/noise_shape.hpp"
#include "sllg/parallel.hpp"
#include "sllg/rng.hpp"
#include "sllg/sde_sphere.hpp"
#include "sllg/statistics.hpp"

namespace sllg {

enum class ChainStart { kUniform, kFixed };

/// Krylov-Bogoliubov time averaging of the sphere SDE over independent chains.
struct KbOptions {
  NoiseKind noise = NoiseKind::kShapeB;
  double h2 = 1.0;
  Vec3 h1{0.0, 0.0, 1.0};
  double dt = 1e-3;
  /// Averaging window length after burn-in.
  double horizon = 200.0;
  double burn_in = 0.0;
  /// Time between recorded states.
  double sample_dt = 0.1;
  std::size_t n_chains = 64;
  std::uint64_t seed = 0;
  std::size_t n_z_bands = 16;
  std::size_t n_phi = 16;
  ChainStart start = ChainStart::kUniform;
  Vec3 start_point{0.0, 0.0, 1.0};

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("kb: dt must be positive");
    if (!(horizon > 0.0)) throw ConfigError("kb: horizon must be positive");
    if (!(burn_in >= 0.0)) throw ConfigError("kb: burn-in must be nonnegative");
    if (!(sample_dt >= dt)) throw ConfigError("kb: sample spacing must be at least dt");
    if (n_chains == 0) throw ConfigError("kb: need at least one chain");
  }
};

struct KbChain {
  EmpiricalSphereMeasure measure;
  Moments z;
  Moments z2;
  std::vector<double> z_samples;
};

struct KbResult {
  EmpiricalSphereMeasure measure;
  /// Pooled moments of v_3 and v_3^2 over all recorded states.
  Moments z;
  Moments z2;
  /// Moments of the per-chain time averages; the chains are independent, so their spread
  /// gives honest standard errors under autocorrelation.
  Moments chain_mean_z;
  Moments chain_mean_z2;
  /// Recorded v_3 values, chains concatenated in order.
  std::vector<double> z_samples;

  double mean_z() const { return z.mean(); }
  double mean_z2() const { return z2.mean(); }
  double stderr_z() const { return chain_mean_z.stderr_of_mean(); }
  double stderr_z2() const { return chain_mean_z2.stderr_of_mean(); }

  /// Sample count with the same variance of the mean as the correlated record.
  double effective_samples() const {
    const double se = stderr_z();
    if (!(se > 0.0)) return static_cast<double>(z.n);
    return std::min(static_cast<double>(z.n), z.variance() / (se * se));
  }
};

inline KbChain run_kb_chain(const AnisotropyParams& p, const KbOptions& o, std::size_t chain) {
  Rng rng(o.seed, chain);
  Vec3 v = o.start == ChainStart::kUniform ? rng.uniform_on_sphere() : o.start_point / norm(o.start_point);
  const auto n_burn = static_cast<std::size_t>(std::llround(o.burn_in / o.dt));
  const auto n_avg = static_cast<std::size_t>(std::llround(o.horizon / o.dt));
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(o.sample_dt / o.dt)));
  const double sq = std::sqrt(o.dt);

  KbChain c{EmpiricalSphereMeasure(o.n_z_bands, o.n_phi), {}, {}, {}};
  auto advance = [&] {
    if (o.noise == NoiseKind::kShapeB)
      v = sde_step_B(v, p, o.h2, sq * rng.normal3(), o.dt);
    else
      v = sde_step_A(v, o.h1, sq * rng.normal(), p, o.dt);
  };
  for (std::size_t k = 0; k < n_burn; ++k) advance();
  for (std::size_t k = 1; k <= n_avg; ++k) {
    advance();
    if (k % stride == 0) {
      c.measure.accumulate(v);
      c.z.add(v.z);
      c.z2.add(v.z * v.z);
      c.z_samples.push_back(v.z);
    }
  }
  return c;
}

/// Runs all chains (in parallel when workers > 1) and merges in chain order.
inline KbResult run_kb(const AnisotropyParams& p, const KbOptions& o, std::size_t workers = 1) {
  p.validate();
  o.validate();
  std::vector<KbChain> chains(o.n_chains, KbChain{EmpiricalSphereMeasure(o.n_z_bands, o.n_phi), {}, {}, {}});
  parallel_for(o.n_chains, workers, [&](std::size_t i) { chains[i] = run_kb_chain(p, o, i); });
  KbResult r{EmpiricalSphereMeasure(o.n_z_bands, o.n_phi), {}, {}, {}, {}, {}};
  for (const auto& c : chains) {
    r.measure.merge(c.measure);
    r.z.merge(c.z);
    r.z2.merge(c.z2);
    r.chain_mean_z.add(c.z.mean());
    r.chain_mean_z2.add(c.z2.mean());
    r.z_samples.insert(r.z_samples.end(), c.z_samples.begin(), c.z_samples.end());
  }
  return r;
}

/// Two-sided 1% critical value of the Kolmogorov-Smirnov statistic for n samples
/// (asymptotic form 1.63 / sqrt(n)).
inline double ks_critical_1pct(double n) { return 1.63 / std::sqrt(n); }

}  // namespace sllg
