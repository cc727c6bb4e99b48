#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "sllg/anisotropy.hpp"
#include "sllg/errors.hpp"
#include "sllg/field.hpp"
#include "sllg/noise_shape.hpp"
#include "sllg/parallel.hpp"
#include "sllg/spde.hpp"
#include "sllg/statistics.hpp"

namespace sllg {

/// One side-by-side comparison lhs <= rhs with its Monte Carlo error bar.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double mc_stderr = 0.0;
  /// Number of standard errors granted.
  double k = 3.0;
  /// Absolute allowance for discretization error.
  double allowance = 0.0;
  std::map<std::string, double> constants;

  double slack() const { return rhs - lhs; }
  bool pass() const { return lhs <= rhs + k * mc_stderr + allowance; }
};

// ---- ensembles --------------------------------------------------------------

struct EnsembleSpec {
  AnisotropyParams params{};
  SolverConfig solver{};
  SimulationOptions options{};
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
};

/// Independent trajectories from a common initial state; path i uses stream i of the seed.
inline std::vector<TrajectoryRecord> run_ensemble(const SphereField& u0, const NoiseShape& shape,
                                                  const EnsembleSpec& spec, std::size_t workers = 1) {
  if (spec.n_paths == 0) throw ConfigError("ensemble needs at least one path");
  // Validates the gates once before any compute.
  SpdeStepper probe(u0.grid(), spec.params, shape, spec.solver);
  std::vector<TrajectoryRecord> out(spec.n_paths);
  parallel_for(spec.n_paths, workers, [&](std::size_t i) {
    SpdeStepper stepper(u0.grid(), spec.params, shape, spec.solver);
    auto src = IncrementSource::from_rng(spec.seed, i, spec.solver.dt, shape.brownian_dimension());
    out[i] = simulate(u0, stepper, spec.options, src);
  });
  return out;
}

namespace detail {

inline void require_common_sampling(const std::vector<TrajectoryRecord>& recs) {
  if (recs.empty()) throw ConfigError("empty ensemble");
  for (const auto& r : recs)
    if (r.samples.size() != recs.front().samples.size()) throw ConfigError("ensemble sample grids differ");
}

/// Ensemble mean of a sample field at every sample index.
template <class F>
std::vector<double> sample_means(const std::vector<TrajectoryRecord>& recs, F&& f) {
  std::vector<double> m(recs.front().samples.size(), 0.0);
  for (const auto& r : recs)
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += f(r.samples[j]);
  for (auto& x : m) x /= static_cast<double>(recs.size());
  return m;
}

/// Shared shape of the energy-type inequalities, with the supremum taken over the running sum
///   sup_r E[G_r + c_int int_0^r F + c_diss int_0^r ||u x u_xx||^2] <= E[G_0] + growth T.
/// The standard error is that of the per-path quantity at the maximizing sample index.
template <class F>
InequalityReport energy_type_report(std::string name, const std::vector<TrajectoryRecord>& recs, double c_int,
                                    F&& integrand, double c_diss, double growth_rate, double allowance) {
  require_common_sampling(recs);
  const std::size_t n_samples = recs.front().samples.size();
  std::vector<std::vector<double>> q(recs.size(), std::vector<double>(n_samples));
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& s = recs[i].samples;
    double integral = 0.0;
    for (std::size_t j = 0; j < n_samples; ++j) {
      if (j > 0) integral += 0.5 * (s[j].time - s[j - 1].time) * (integrand(s[j - 1]) + integrand(s[j]));
      q[i][j] = s[j].grad_norm_sq + c_diss * s[j].cross_lap_int + c_int * integral;
    }
  }
  std::size_t jmax = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n_samples; ++j) {
    double m = 0.0;
    for (const auto& row : q) m += row[j];
    if (m > best) best = m, jmax = j;
  }
  Moments per_path;
  Moments g0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    per_path.add(q[i][jmax]);
    g0.add(recs[i].samples.front().grad_norm_sq);
  }
  const double horizon = recs.front().samples.back().time;
  InequalityReport rep;
  rep.name = std::move(name);
  rep.lhs = per_path.mean();
  rep.rhs = g0.mean() + growth_rate * horizon;
  rep.mc_stderr = per_path.stderr_of_mean();
  rep.allowance = allowance;
  rep.constants["horizon"] = horizon;
  rep.constants["n_paths"] = static_cast<double>(recs.size());
  rep.constants["growth_rate"] = growth_rate;
  rep.constants["sup_time"] = recs.front().samples[jmax].time;
  return rep;
}

}  // namespace detail

/// Growth rate of E||u_x||^2 contributed by a nonconstant noise profile: 2 ||h_x||^2.
inline double noise_growth_rate(const NoiseShape& shape, const Grid1D& grid) { return 2.0 * shape.grad_norm_sq(grid); }

/// sup E||u_x||^2 + 2 l2 int E||u x u_xx||^2 <= E||u_x^0||^2 + 2 t ||h_x||^2 (g = 0).
inline InequalityReport energy_inequality(const std::vector<TrajectoryRecord>& recs, double lambda2,
                                          double growth_rate, double allowance = 0.0) {
  auto rep = detail::energy_type_report("energy_inequality", recs, 0.0, [](const TrajectorySample&) { return 0.0; },
                                        2.0 * lambda2, growth_rate, allowance);
  rep.constants["lambda2"] = lambda2;
  return rep;
}

/// Per-step relative growth of ||u_x|| tolerated by the monotonicity check: 10 dt dx^2.
inline double step_growth_slack(double dt, double dx) { return 10.0 * dt * dx * dx; }

/// Young constant of the anisotropic estimate: (8/3) (l1^2 / l2 + l2), from the weights
/// eps = l2 / l1^2 for the precession term and eps = 1 / l2 for the damping term.
inline double anisotropic_constant(double lambda1, double lambda2) {
  return 8.0 / 3.0 * (lambda1 * lambda1 / lambda2 + lambda2);
}

/// sup E||u_x||^2 + (3 l2 / 2) int E||u x u_xx||^2
///   <= E||u_x^0||^2 + t [2 ||h_x||^2 + (sup|A_ij|^2 + |b|^2) C(l1, l2)].
inline InequalityReport anisotropic_energy_inequality(const std::vector<TrajectoryRecord>& recs,
                                                      const AnisotropyParams& p, double noise_growth,
                                                      double allowance = 0.0) {
  const double c = anisotropic_constant(p.lambda1, p.lambda2);
  const double a = p.A.max_abs_entry();
  const double forcing = (a * a + norm_sq(p.b)) * c;
  auto rep = detail::energy_type_report(
      "anisotropic_energy_inequality", recs, 0.0, [](const TrajectorySample&) { return 0.0; }, 1.5 * p.lambda2,
      noise_growth + forcing, allowance);
  rep.constants["C_lambda"] = c;
  rep.constants["anisotropy_forcing"] = forcing;
  return rep;
}

/// l2 / C_p - (4 l2 G + 2 |l1| sup|A_ij|^2).
inline double improved_constant(const AnisotropyParams& p, double poincare_constant) {
  const double a = p.A.max_abs_entry();
  return p.lambda2 / poincare_constant - (4.0 * p.lambda2 * p.g_bar() + 2.0 * std::abs(p.lambda1) * a * a);
}

/// sup E||u_x||^2 + C int E||u x u_x||^2 + l2 int E||u x u_xx||^2 <= E||u_x^0||^2 + 2 t ||h1_x||^2,
/// under the smallness condition. ||u x u_x|| = ||u_x|| for unit fields.
inline InequalityReport improved_anisotropic_inequality(const std::vector<TrajectoryRecord>& recs,
                                                        const AnisotropyParams& p, double poincare_constant,
                                                        double noise_growth, double allowance = 0.0) {
  const auto small = smallness_check(p, poincare_constant);
  if (!small.pass)
    throw GateError("smallness condition violated: G = " + format_double(small.g_bar) + " >= " +
                        format_double(small.threshold),
                    small.threshold);
  const double c = improved_constant(p, poincare_constant);
  auto rep = detail::energy_type_report(
      "improved_anisotropic_inequality", recs, c, [](const TrajectorySample& s) { return s.grad_norm_sq; },
      p.lambda2, noise_growth, allowance);
  rep.constants["C_lambda"] = c;
  rep.constants["smallness_ratio"] = small.ratio;
  rep.constants["poincare_constant"] = poincare_constant;
  return rep;
}

/// Minimal C with int_0^t E[||u_xx||^(1/2)] dr <= C (E||u_x^0||^2 + t) on every sample time.
inline InequalityReport h2_halfnorm_growth(const std::vector<TrajectoryRecord>& recs) {
  detail::require_common_sampling(recs);
  const auto m = detail::sample_means(recs, [](const TrajectorySample& s) { return std::sqrt(s.lap_norm); });
  const auto g = detail::sample_means(recs, [](const TrajectorySample& s) { return s.grad_norm_sq; });
  const auto& samples = recs.front().samples;
  double integral = 0.0, c_min = 0.0;
  for (std::size_t j = 1; j < m.size(); ++j) {
    integral += 0.5 * (samples[j].time - samples[j - 1].time) * (m[j] + m[j - 1]);
    const double denom = g[0] + samples[j].time;
    if (denom > 0.0) c_min = std::max(c_min, integral / denom);
    else if (integral > 0.0) c_min = std::numeric_limits<double>::infinity();
  }
  InequalityReport rep;
  rep.name = "h2_halfnorm_growth";
  rep.lhs = integral;
  rep.rhs = std::isfinite(c_min) ? c_min * (g[0] + samples.back().time) : c_min;
  rep.constants["C_min"] = c_min;
  rep.constants["horizon"] = samples.back().time;
  return rep;
}

/// ||u x u_xx|| - C_p^{-1} ||u x u_x|| for a field with discrete Neumann boundaries.
inline InequalityReport poincare_cross_check(const SphereField& u, double tolerance = 1e-12) {
  const auto d1 = first_derivative(u);
  const auto d2 = second_derivative(u);
  VectorField a(u.size()), b(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    a[i] = cross(u[i], d1[i]);
    b[i] = cross(u[i], d2[i]);
  }
  InequalityReport rep;
  rep.name = "poincare_cross_check";
  rep.lhs = l2_norm(a, u.grid()) / u.grid().poincare_constant();
  rep.rhs = l2_norm(b, u.grid());
  rep.k = 0.0;
  rep.allowance = tolerance;
  rep.constants["poincare_constant"] = u.grid().poincare_constant();
  return rep;
}

// ---- Feller probe -----------------------------------------------------------

inline double h1_distance(std::span<const Vec3> u, std::span<const Vec3> v, const Grid1D& grid) {
  VectorField d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - v[i];
  return std::sqrt(h1_norm_sq(d, grid));
}

/// Normalized u0 + eps w with eps tuned so the H^1 distance to u0 equals target.
inline SphereField perturb(const SphereField& u0, const VectorField& w, double target) {
  if (!(target > 0.0)) return u0;
  auto make = [&](double eps) {
    VectorField v(u0.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = u0[i] + eps * w[i];
    return SphereField::normalized(u0.grid(), std::move(v));
  };
  double eps = target;
  for (int it = 0; it < 8; ++it) {
    const double d = h1_distance(u0.values(), make(eps).values(), u0.grid());
    if (!(d > 0.0)) throw ConfigError("perturb: direction is tangent-free");
    eps *= target / d;
  }
  return make(eps);
}

struct FellerCurve {
  std::vector<double> times;
  /// ||u_t - v_t||_{H^1}.
  std::vector<double> gap;
  /// gap / gap at t = 0; empty when the initial gap is zero.
  std::vector<double> ratio;
};

/// Drives u and v with identical increments through the same stepper code path.
inline FellerCurve feller_gap_curve(const SphereField& u0, const SphereField& v0, SpdeStepper& stepper,
                                    double horizon, std::size_t sample_stride, IncrementSource& source) {
  const Grid1D& grid = stepper.grid();
  VectorField u(u0.values().begin(), u0.values().end());
  VectorField v(v0.values().begin(), v0.values().end());
  const std::size_t n = steps_for(horizon, stepper.config().dt);
  FellerCurve c;
  c.times.push_back(0.0);
  c.gap.push_back(h1_distance(u, v, grid));
  for (std::size_t k = 1; k <= n; ++k) {
    const auto inc = source.next();
    stepper.step(u, inc);
    stepper.step(v, inc);
    if ((sample_stride > 0 && k % sample_stride == 0) || k == n) {
      c.times.push_back(static_cast<double>(k) * stepper.config().dt);
      c.gap.push_back(h1_distance(u, v, grid));
    }
  }
  if (c.gap.front() > 0.0)
    for (double g : c.gap) c.ratio.push_back(g / c.gap.front());
  return c;
}

inline FellerCurve feller_probe(const SphereField& u0, const SphereField& v0, SpdeStepper& stepper, double horizon,
                                std::size_t sample_stride, IncrementSource& source) {
  if (!(h1_distance(u0.values(), v0.values(), u0.grid()) > 0.0))
    throw ConfigError("feller_probe: initial states coincide");
  return feller_gap_curve(u0, v0, stepper, horizon, sample_stride, source);
}

/// log r(t) <= a + c t.
struct EnvelopeFit {
  double a = 0.0;
  double c = 0.0;
  bool bounds(const FellerCurve& curve, double tol = 1e-12) const {
    for (std::size_t j = 0; j < curve.ratio.size(); ++j)
      if (std::log(curve.ratio[j]) > a + c * curve.times[j] + tol) return false;
    return true;
  }
};

/// Least-squares slope of log r against t over all points, then the smallest intercept
/// that puts every point under the line.
inline EnvelopeFit fit_envelope(const std::vector<FellerCurve>& curves) {
  Moments t, y;
  double sty = 0.0;
  for (const auto& cv : curves)
    for (std::size_t j = 0; j < cv.ratio.size(); ++j) {
      const double ly = std::log(cv.ratio[j]);
      t.add(cv.times[j]);
      y.add(ly);
      sty += cv.times[j] * ly;
    }
  if (t.n < 2) throw ConfigError("fit_envelope: not enough points");
  const double n = static_cast<double>(t.n);
  const double var_t = t.sum_sq / n - t.mean() * t.mean();
  EnvelopeFit fit;
  fit.c = var_t > 0.0 ? (sty / n - t.mean() * y.mean()) / var_t : 0.0;
  fit.a = -std::numeric_limits<double>::infinity();
  for (const auto& cv : curves)
    for (std::size_t j = 0; j < cv.ratio.size(); ++j)
      fit.a = std::max(fit.a, std::log(cv.ratio[j]) - fit.c * cv.times[j]);
  return fit;
}

inline double envelope_fraction(const std::vector<FellerCurve>& curves, const EnvelopeFit& fit) {
  if (curves.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& c : curves) ok += fit.bounds(c) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(curves.size());
}

struct FellerOptions {
  std::vector<double> perturbations{1e-3, 5e-4};
  double horizon = 1.0;
  std::size_t sample_stride = 10;
  std::size_t n_paths = 64;
  /// Paths used only to fit the envelope; their streams follow the probe streams.
  std::size_t calibration_paths = 64;
  std::uint64_t seed = 0;
  double min_fraction = 0.95;
};

struct FellerPerturbation {
  double size = 0.0;
  EnvelopeFit fit;
  /// Share of probe paths whose log r(t) stays under the fitted envelope.
  double fraction = 0.0;
  /// Ensemble mean of ||u_T - v_T||_{H^1}.
  double mean_final_gap = 0.0;
  std::vector<FellerCurve> curves;
};

struct FellerReport {
  /// Largest gap seen with v0 = u0; exactly zero when both runs share the code path.
  double zero_gap_max = 0.0;
  std::vector<FellerPerturbation> results;
  double min_fraction = 0.95;

  /// Mean final gap of the first perturbation over that of the second.
  double first_order_ratio() const {
    if (results.size() < 2 || !(results[1].mean_final_gap > 0.0)) return 0.0;
    return results[0].mean_final_gap / results[1].mean_final_gap;
  }

  /// Within a factor of two of the ratio of the perturbation sizes.
  bool first_order_ok() const {
    if (results.size() < 2) return true;
    const double expected = results[0].size / results[1].size;
    const double r = first_order_ratio();
    return r >= expected / 2.0 && r <= expected * 2.0;
  }

  bool pass() const {
    bool ok = zero_gap_max == 0.0 && first_order_ok();
    for (const auto& r : results) ok = ok && r.fraction >= min_fraction;
    return ok;
  }
};

/// Default perturbation direction: a smooth Neumann-compatible bump with all three components.
inline VectorField feller_direction(const Grid1D& grid) {
  VectorField w(grid.n_points());
  const double k = std::numbers::pi / grid.length();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(k * grid.node(i)) * Vec3{0.3, -0.5, 0.8};
  return w;
}

inline FellerReport feller_experiment(const SphereField& u0, const AnisotropyParams& p, const NoiseShape& shape,
                                      const SolverConfig& cfg, const FellerOptions& o, std::size_t workers = 1) {
  if (o.n_paths == 0 || o.calibration_paths == 0) throw ConfigError("feller: empty ensemble");
  SpdeStepper gate(u0.grid(), p, shape, cfg);
  const int dim = shape.brownian_dimension();
  FellerReport rep;
  rep.min_fraction = o.min_fraction;

  {
    SpdeStepper st(u0.grid(), p, shape, cfg);
    auto src = IncrementSource::from_rng(o.seed, 0, cfg.dt, dim);
    const auto c = feller_gap_curve(u0, u0, st, o.horizon, o.sample_stride, src);
    for (double g : c.gap) rep.zero_gap_max = std::max(rep.zero_gap_max, g);
  }

  const auto w = feller_direction(u0.grid());
  for (double eps : o.perturbations) {
    const SphereField v0 = perturb(u0, w, eps);
    std::vector<FellerCurve> all(o.n_paths + o.calibration_paths);
    parallel_for(all.size(), workers, [&](std::size_t i) {
      SpdeStepper st(u0.grid(), p, shape, cfg);
      auto src = IncrementSource::from_rng(o.seed, i, cfg.dt, dim);
      all[i] = feller_probe(u0, v0, st, o.horizon, o.sample_stride, src);
    });
    FellerPerturbation r;
    r.size = eps;
    r.curves.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(o.n_paths));
    const std::vector<FellerCurve> calib(all.begin() + static_cast<std::ptrdiff_t>(o.n_paths), all.end());
    r.fit = fit_envelope(calib);
    r.fraction = envelope_fraction(r.curves, r.fit);
    Moments g;
    for (const auto& c : r.curves) g.add(c.gap.back());
    r.mean_final_gap = g.mean();
    rep.results.push_back(std::move(r));
  }
  return rep;
}

// ---- stationary flatness ----------------------------------------------------

struct FlatnessReport {
  /// max_t ||u_x(t)||_{L^2}.
  double max_grad_norm = 0.0;
  /// max_t max_i |u_i(t) - u_i(0)|.
  double max_displacement = 0.0;
  std::size_t n_steps = 0;
};

/// Evolves u0 with a spatially constant noise profile and records how far it strays from
/// spatial constancy at every step.
inline FlatnessReport stationary_flatness(const SphereField& u0, SpdeStepper& stepper, double horizon,
                                          IncrementSource& source) {
  if (!stepper.shape().spatially_constant()) throw ConfigError("stationary_flatness: noise profile is not constant");
  const auto small = smallness_check(stepper.params(), stepper.grid().poincare_constant());
  if (!small.pass) throw GateError("stationary_flatness: smallness condition violated", small.threshold);
  VectorField u(u0.values().begin(), u0.values().end());
  FlatnessReport rep;
  rep.n_steps = steps_for(horizon, stepper.config().dt);
  rep.max_grad_norm = std::sqrt(grad_norm_sq(u, stepper.grid()));
  for (std::size_t k = 0; k < rep.n_steps; ++k) {
    stepper.step(u, source.next());
    rep.max_grad_norm = std::max(rep.max_grad_norm, std::sqrt(grad_norm_sq(u, stepper.grid())));
    for (std::size_t i = 0; i < u.size(); ++i) rep.max_displacement = std::max(rep.max_displacement, norm(u[i] - u0[i]));
  }
  return rep;
}

// ---- synchronization --------------------------------------------------------

struct SyncOptions {
  std::vector<double> t_list{0.0, 1.0, 2.0, 4.0, 8.0};
  /// Run length; alpha is read off here. 0 selects twice the largest entry of t_list.
  double horizon = 0.0;
  std::size_t sample_stride = 10;
  std::size_t n_paths = 32;
  std::uint64_t seed = 0;
  /// Pass iff the statistic at the largest T is at most this fraction of its value at T = 0.
  double decay_fraction = 0.2;
};

struct SyncPath {
  double alpha = 0.0;
  double alpha_bound = 0.0;
  /// sup_{t >= T} || |u_t - B_t|^2 - alpha ||_{L^1}, one entry per T.
  std::vector<double> sup_deviation;
  /// Energy bound on the part of alpha's time integral beyond the horizon.
  double tail_bound = 0.0;
};

struct SyncReport {
  std::vector<double> t_list;
  double horizon = 0.0;
  std::vector<SyncPath> paths;
  /// Ensemble mean of sup_deviation, one entry per T.
  std::vector<double> sup_deviation;
  std::vector<double> sup_deviation_stderr;
  double alpha_mean = 0.0;
  double max_tail_bound = 0.0;
  bool alpha_bound_ok = true;
  double decay_fraction = 0.2;

  /// statistic at the largest T over the statistic at T = 0.
  double decay_ratio() const {
    return sup_deviation.front() > 0.0 ? sup_deviation.back() / sup_deviation.front() : 0.0;
  }
  bool pass() const { return alpha_bound_ok && sup_deviation.back() <= decay_fraction * sup_deviation.front(); }
};

/// One coupled run of u and of B, B being the constant field <u0>/|<u0>| moved by the same
/// stepper and the same increments on a three-node grid.
inline SyncPath sync_path(const SphereField& u0, const AnisotropyParams& p, const NoiseShape& shape,
                          const SolverConfig& cfg, const SyncOptions& o, double horizon, std::size_t path) {
  const Grid1D& grid = u0.grid();
  const Grid1D point_grid(3, grid.length());
  SpdeStepper su(grid, p, shape, cfg);
  SpdeStepper sb(point_grid, p, NoiseShape::constant_b(point_grid, shape.h2()[0]), cfg);
  const Vec3 mean = spatial_average(u0);
  if (!(norm(mean) > 0.0)) throw ConfigError("sync: initial field has zero mean");
  VectorField u(u0.values().begin(), u0.values().end());
  VectorField b(3, mean / norm(mean));
  auto src = IncrementSource::from_rng(o.seed, path, cfg.dt, 3);

  const std::size_t n = steps_for(horizon, cfg.dt);
  std::vector<double> times;
  std::vector<std::vector<double>> sq;  // |u - B|^2 per node
  auto record = [&](double t) {
    std::vector<double> s(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) s[i] = norm_sq(u[i] - b[0]);
    times.push_back(t);
    sq.push_back(std::move(s));
  };
  record(0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto inc = src.next();
    su.step(u, inc);
    sb.step(b, inc);
    if ((o.sample_stride > 0 && k % o.sample_stride == 0) || k == n) record(static_cast<double>(k) * cfg.dt);
  }

  SyncPath out;
  double a = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) a += grid.weight(i) * sq.back()[i];
  out.alpha = a / grid.length();
  const double cp = grid.poincare_constant();
  out.alpha_bound = 4.0 + cp / grid.length() * grad_norm_sq(u0);
  out.tail_bound = cp * cp / (p.lambda2 * grid.length()) * grad_norm_sq(u, grid);

  std::vector<double> dev(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += grid.weight(i) * std::abs(sq[j][i] - out.alpha);
    dev[j] = s;
  }
  for (double T : o.t_list) {
    double m = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j)
      if (times[j] >= T - 1e-12) m = std::max(m, dev[j]);
    out.sup_deviation.push_back(m);
  }
  return out;
}

inline SyncReport sync_experiment(const SphereField& u0, const AnisotropyParams& p, const NoiseShape& shape,
                                  const SolverConfig& cfg, const SyncOptions& o, std::size_t workers = 1) {
  if (!p.is_zero()) throw ConfigError("sync: requires g = 0");
  if (shape.kind() != NoiseKind::kShapeB || !shape.spatially_constant())
    throw ConfigError("sync: requires a spatially constant shape B profile");
  if (o.t_list.empty() || o.n_paths == 0) throw ConfigError("sync: empty horizon list or ensemble");
  if (!std::is_sorted(o.t_list.begin(), o.t_list.end())) throw ConfigError("sync: horizons must be increasing");
  const double horizon = o.horizon > 0.0 ? o.horizon : 2.0 * o.t_list.back();
  if (horizon < o.t_list.back()) throw ConfigError("sync: run horizon shorter than the largest T");
  SpdeStepper gate(u0.grid(), p, shape, cfg);

  SyncReport rep;
  rep.t_list = o.t_list;
  rep.horizon = horizon;
  rep.decay_fraction = o.decay_fraction;
  rep.paths.resize(o.n_paths);
  parallel_for(o.n_paths, workers, [&](std::size_t i) { rep.paths[i] = sync_path(u0, p, shape, cfg, o, horizon, i); });

  Moments alpha;
  for (std::size_t t = 0; t < o.t_list.size(); ++t) {
    Moments m;
    for (const auto& path : rep.paths) m.add(path.sup_deviation[t]);
    rep.sup_deviation.push_back(m.mean());
    rep.sup_deviation_stderr.push_back(m.stderr_of_mean());
  }
  for (const auto& path : rep.paths) {
    alpha.add(path.alpha);
    rep.max_tail_bound = std::max(rep.max_tail_bound, path.tail_bound);
    if (std::abs(path.alpha) > path.alpha_bound) rep.alpha_bound_ok = false;
  }
  rep.alpha_mean = alpha.mean();
  return rep;
}

}  // namespace sllg
