#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sllg/anisotropy.hpp"
#include "sllg/brownian.hpp"
#include "sllg/errors.hpp"
#include "sllg/field.hpp"
#include "sllg/noise_shape.hpp"
#include "sllg/rng.hpp"
#include "sllg/rotation.hpp"
#include "sllg/rough_driver.hpp"
#include "sllg/vec3.hpp"

namespace sllg {

enum class Scheme { kStrangRotation, kItoEulerProject, kStratonovichHeunProject };

struct SolverConfig {
  double dt = 1e-4;
  Scheme scheme = Scheme::kStrangRotation;
  bool renormalize_after_drift = true;
  double cfl_safety = 0.9;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver dt must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("cfl_safety must lie in (0, 1]");
  }
};

struct CflResult {
  bool pass = false;
  double dt = 0.0;
  double max_dt = 0.0;
};

/// Explicit Euler on u' = (l2 + i l1) u_xx is stable for dt <= l2 dx^2 / (2 (l1^2 + l2^2));
/// with l1 = 0 this is the usual dx^2 / (2 l2).
inline CflResult cfl_check(const AnisotropyParams& p, const Grid1D& grid, double dt, double safety) {
  const double dx2 = grid.dx() * grid.dx();
  const double denom = 2.0 * (p.lambda1 * p.lambda1 + p.lambda2 * p.lambda2);
  CflResult r;
  r.dt = dt;
  r.max_dt = safety * p.lambda2 * dx2 / denom;
  r.pass = dt <= r.max_dt;
  return r;
}

/// Deterministic drift l1 u x H - l2 u x (u x H) with H = u_xx +- g'(u) (sign from the
/// drift convention), mirrored Laplacian. Writes into out and returns the trapezoid
/// integral of |u x u_xx|^2, the dissipation rate of the exchange energy.
inline double drift_into(std::span<const Vec3> u, const Grid1D& grid, const AnisotropyParams& p,
                         std::span<Vec3> lap, std::span<Vec3> out) {
  second_derivative_into(u, grid.dx(), lap);
  const bool aniso = !p.is_zero();
  const double sign = p.anisotropy_sign();
  double dissipation = 0.0;
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 ul = cross(u[i], lap[i]);
    dissipation += grid.weight(i) * norm_sq(ul);
    Vec3 uh = ul;
    if (aniso) uh += sign * cross(u[i], p.g_prime(u[i]));
    out[i] = p.lambda1 * uh - p.lambda2 * cross(u[i], uh);
  }
  return dissipation;
}

inline VectorField drift(const SphereField& u, const AnisotropyParams& p) {
  VectorField lap(u.size()), out(u.size());
  drift_into(u.values(), u.grid(), p, lap, out);
  return out;
}

/// L^2 norm of -u x (u x u_xx) - (u_xx + u |u_x|^2) with one-sided boundary stencils.
inline double drift_equivalent_residual(const SphereField& u) {
  const auto d1 = first_derivative(u, BoundaryClosure::kOneSided);
  const auto d2 = second_derivative(u, BoundaryClosure::kOneSided);
  VectorField r(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    r[i] = -cross(u[i], cross(u[i], d2[i])) - (d2[i] + norm_sq(d1[i]) * u[i]);
  return l2_norm(r, u.grid());
}

/// Rotates node i by the rotation vector omega[i] (axis omega/|omega|, angle |omega|).
inline SphereField rotation_step(const SphereField& u, std::span<const Vec3> omega) {
  if (omega.size() != u.size()) throw ConfigError("rotation_step: one rotation vector per node");
  SphereField out = u;
  auto& v = FieldMutator::values(out);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = rotate_by(v[i], omega[i]);
  return out;
}

/// Noise increment of one time step: dW for shape B, dB for shape A.
struct NoiseIncrement {
  Vec3 dW{};
  double dB = 0.0;
};

/// Supplies per-step increments either from a seeded stream or from a recorded path.
class IncrementSource {
 public:
  static IncrementSource from_rng(std::uint64_t seed, std::uint64_t stream, double dt, int dimension) {
    IncrementSource s;
    s.rng_.emplace(seed, stream);
    s.sqrt_dt_ = std::sqrt(dt);
    s.dimension_ = dimension;
    return s;
  }

  /// The path must outlive the source.
  static IncrementSource from_path(const BrownianPath& path) {
    IncrementSource s;
    s.path_ = &path;
    s.dimension_ = path.dimension;
    return s;
  }

  static IncrementSource zero(int dimension) {
    IncrementSource s;
    s.dimension_ = dimension;
    return s;
  }

  int dimension() const { return dimension_; }

  NoiseIncrement next() {
    NoiseIncrement inc;
    if (rng_) {
      if (dimension_ == 3)
        inc.dW = sqrt_dt_ * rng_->normal3();
      else
        inc.dB = sqrt_dt_ * rng_->normal();
    } else if (path_) {
      if (cursor_ >= path_->n_steps()) throw ConfigError("recorded Brownian path exhausted");
      if (dimension_ == 3)
        inc.dW = path_->increment3(cursor_);
      else
        inc.dB = path_->scalar_increment(cursor_);
      ++cursor_;
    }
    return inc;
  }

 private:
  std::optional<Rng> rng_;
  const BrownianPath* path_ = nullptr;
  std::size_t cursor_ = 0;
  double sqrt_dt_ = 0.0;
  int dimension_ = 3;
};

/// One-trajectory time stepper. Owns scratch buffers; not shareable across threads.
class SpdeStepper {
 public:
  SpdeStepper(Grid1D grid, AnisotropyParams params, NoiseShape shape, SolverConfig cfg)
      : grid_(grid), p_(params), shape_(std::move(shape)), cfg_(cfg) {
    p_.validate();
    cfg_.validate();
    if (shape_.size() != grid_.n_points()) throw ConfigError("noise profile size does not match grid");
    const auto cfl = cfl_check(p_, grid_, cfg_.dt, cfg_.cfl_safety);
    if (!cfl.pass)
      throw GateError("dt " + std::to_string(cfg_.dt) + " exceeds the CFL bound " +
                          std::to_string(cfl.max_dt),
                      cfl.max_dt);
    const std::size_t n = grid_.n_points();
    lap_.resize(n);
    f0_.resize(n);
    f1_.resize(n);
    pred_.resize(n);
    if (shape_.kind() == NoiseKind::kShapeA) {
      axis_.resize(n);
      axis_len_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        axis_len_[i] = norm(shape_.h1()[i]);
        axis_[i] = axis_len_[i] > 0.0 ? shape_.h1()[i] / axis_len_[i] : Vec3{};
      }
    }
  }

  const Grid1D& grid() const { return grid_; }
  const AnisotropyParams& params() const { return p_; }
  const NoiseShape& shape() const { return shape_; }
  const SolverConfig& config() const { return cfg_; }

  /// Advances u by one step in place. Returns the dissipation rate at the drift stage.
  double step(VectorField& u, const NoiseIncrement& inc) {
    double dissipation = 0.0;
    switch (cfg_.scheme) {
      case Scheme::kStrangRotation: dissipation = strang(u, inc); break;
      case Scheme::kItoEulerProject: dissipation = ito_euler(u, inc); break;
      case Scheme::kStratonovichHeunProject: dissipation = heun(u, inc); break;
    }
    for (const auto& v : u)
      if (!is_finite(v)) throw BlowUpError("non-finite state; dt is likely too large", 0.0);
    return dissipation;
  }

  SphereField step(const SphereField& u, const NoiseIncrement& inc) {
    SphereField out = u;
    step(FieldMutator::values(out), inc);
    return out;
  }

 private:
  /// Exact flow of the noise over the given fraction of the increment.
  void rotate(VectorField& u, const NoiseIncrement& inc, double fraction) {
    const std::size_t n = u.size();
    if (shape_.kind() == NoiseKind::kShapeB) {
      const double len = norm(inc.dW);
      if (len == 0.0) return;
      const Vec3 e = inc.dW / len;
      if (shape_.spatially_constant()) {
        const double theta = fraction * shape_.h2()[0] * len;
        const double c = std::cos(theta), s = std::sin(theta);
        for (auto& v : u) v = rodrigues(v, e, c, s);
      } else {
        for (std::size_t i = 0; i < n; ++i) u[i] = rodrigues(u[i], e, fraction * shape_.h2()[i] * len);
      }
    } else {
      if (inc.dB == 0.0) return;
      if (shape_.spatially_constant()) {
        const double theta = fraction * axis_len_[0] * inc.dB;
        const double c = std::cos(theta), s = std::sin(theta);
        for (auto& v : u) v = rodrigues(v, axis_[0], c, s);
      } else {
        for (std::size_t i = 0; i < n; ++i)
          u[i] = rodrigues(u[i], axis_[i], fraction * axis_len_[i] * inc.dB);
      }
    }
  }

  /// Stratonovich noise term u x (h dW) resp. u x h1 dB at node i.
  Vec3 noise_term(const Vec3& v, std::size_t i, const NoiseIncrement& inc) const {
    if (shape_.kind() == NoiseKind::kShapeB) return shape_.h2()[i] * cross(v, inc.dW);
    return inc.dB * cross(v, shape_.h1()[i]);
  }

  Vec3 ito_term(const Vec3& v, std::size_t i) const {
    if (shape_.kind() == NoiseKind::kShapeB) {
      const double h = shape_.h2()[i];
      return ito_correction(v, h * h);
    }
    return ito_correction_axis(v, shape_.h1()[i]);
  }

  static void project(VectorField& u) {
    for (auto& v : u) v = v / norm(v);
  }

  double strang(VectorField& u, const NoiseIncrement& inc) {
    rotate(u, inc, 0.5);
    const double d = drift_into(u, grid_, p_, lap_, f0_);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += cfg_.dt * f0_[i];
    if (cfg_.renormalize_after_drift) project(u);
    rotate(u, inc, 0.5);
    return d;
  }

  double ito_euler(VectorField& u, const NoiseIncrement& inc) {
    const double d = drift_into(u, grid_, p_, lap_, f0_);
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] += cfg_.dt * (f0_[i] + ito_term(u[i], i)) + noise_term(u[i], i, inc);
    project(u);
    return d;
  }

  double heun(VectorField& u, const NoiseIncrement& inc) {
    const std::size_t n = u.size();
    const double d = drift_into(u, grid_, p_, lap_, f0_);
    for (std::size_t i = 0; i < n; ++i) {
      f0_[i] = cfg_.dt * f0_[i] + noise_term(u[i], i, inc);
      pred_[i] = u[i] + f0_[i];
    }
    drift_into(pred_, grid_, p_, lap_, f1_);
    for (std::size_t i = 0; i < n; ++i)
      u[i] += 0.5 * (f0_[i] + cfg_.dt * f1_[i] + noise_term(pred_[i], i, inc));
    project(u);
    return d;
  }

  Grid1D grid_;
  AnisotropyParams p_;
  NoiseShape shape_;
  SolverConfig cfg_;
  VectorField lap_, f0_, f1_, pred_;
  std::vector<Vec3> axis_;
  std::vector<double> axis_len_;
};

// ---- trajectories -----------------------------------------------------------

struct SimulationOptions {
  double horizon = 0.0;
  /// Record a summary sample every this many steps (0: only the endpoints).
  std::size_t sample_stride = 1;
  /// Store a full snapshot every this many steps (0: none besides the endpoints).
  std::size_t snapshot_stride = 0;
  /// Steps per pasted window; 0 runs the horizon as a single window.
  std::size_t window = 0;
  /// Record the largest per-step relative growth of ||u_x||.
  bool track_step_monotonicity = false;
};

struct TrajectorySample {
  double time = 0.0;
  double grad_norm_sq = 0.0;
  /// \int_0^t ||u x u_xx||^2 dr, left-point rule.
  double cross_lap_int = 0.0;
  double energy = 0.0;
  /// ||u_xx||_{L^2}, mirrored stencil.
  double lap_norm = 0.0;
  Vec3 mean{};
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  std::vector<double> snapshot_times;
  std::vector<SphereField> snapshots;
  std::optional<SphereField> final_state;
  /// max_k (||u_x(t_{k+1})|| - ||u_x(t_k)||) / ||u_x(t_k)||; -inf when not tracked.
  double max_step_growth = -INFINITY;
  std::size_t n_steps = 0;
};

inline std::size_t steps_for(double horizon, double dt) {
  if (!(horizon >= 0.0)) throw ConfigError("horizon must be nonnegative");
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

inline TrajectorySample observe(const SphereField& u, const AnisotropyParams& p, double t,
                                double cross_lap_int) {
  TrajectorySample s;
  s.time = t;
  s.grad_norm_sq = grad_norm_sq(u);
  s.cross_lap_int = cross_lap_int;
  s.energy = energy(u, p);
  s.lap_norm = l2_norm(second_derivative(u), u.grid());
  s.mean = spatial_average(u);
  return s;
}

/// Runs u0 to the horizon. Windows are pasted: each one restarts from the validated
/// endpoint of the previous one.
inline TrajectoryRecord simulate(const SphereField& u0, SpdeStepper& stepper,
                                 const SimulationOptions& opt, IncrementSource& source) {
  if (!(u0.grid() == stepper.grid())) throw ConfigError("simulate: grid mismatch");
  const double dt = stepper.config().dt;
  const std::size_t n_steps = steps_for(opt.horizon, dt);
  const std::size_t window = opt.window == 0 ? std::max<std::size_t>(n_steps, 1) : opt.window;
  const auto& p = stepper.params();

  TrajectoryRecord rec;
  rec.n_steps = n_steps;
  rec.samples.push_back(observe(u0, p, 0.0, 0.0));
  if (opt.snapshot_stride > 0 || n_steps == 0) {
    rec.snapshot_times.push_back(0.0);
    rec.snapshots.push_back(u0);
  }

  SphereField current = u0;
  double cross_lap_int = 0.0;
  double grad_prev = opt.track_step_monotonicity ? std::sqrt(grad_norm_sq(u0)) : 0.0;
  std::size_t k = 0;
  while (k < n_steps) {
    const std::size_t end = std::min(n_steps, k + window);
    VectorField u(current.values().begin(), current.values().end());
    for (; k < end; ++k) {
      double d = 0.0;
      try {
        d = stepper.step(u, source.next());
      } catch (const BlowUpError&) {
        throw BlowUpError("non-finite state; dt is likely too large", static_cast<double>(k + 1) * dt);
      }
      cross_lap_int += dt * d;
      const std::size_t done = k + 1;
      const double t = static_cast<double>(done) * dt;
      if (opt.track_step_monotonicity) {
        const double g = std::sqrt(grad_norm_sq(u, stepper.grid()));
        if (grad_prev > 0.0) rec.max_step_growth = std::max(rec.max_step_growth, (g - grad_prev) / grad_prev);
        grad_prev = g;
      }
      const bool sample = (opt.sample_stride > 0 && done % opt.sample_stride == 0) || done == n_steps;
      const bool snap = (opt.snapshot_stride > 0 && done % opt.snapshot_stride == 0) || done == n_steps;
      if (sample || snap) {
        SphereField f = SphereField::normalized(stepper.grid(), u);
        if (sample) rec.samples.push_back(observe(f, p, t, cross_lap_int));
        if (snap) {
          rec.snapshot_times.push_back(t);
          rec.snapshots.push_back(std::move(f));
        }
      }
    }
    current = SphereField::normalized(stepper.grid(), std::move(u));
  }
  rec.final_state = current;
  return rec;
}

// ---- CSV --------------------------------------------------------------------

/// Shortest round-trip decimal form, locale independent.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_snapshots_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << "time,node_index,u1,u2,u3\n";
  for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
    const auto& f = rec.snapshots[s];
    const std::string t = format_double(rec.snapshot_times[s]);
    for (std::size_t i = 0; i < f.size(); ++i)
      os << t << ',' << i << ',' << format_double(f[i].x) << ',' << format_double(f[i].y) << ','
         << format_double(f[i].z) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << "time,grad_norm_sq,cross_lap_int,energy\n";
  for (const auto& s : rec.samples)
    os << format_double(s.time) << ',' << format_double(s.grad_norm_sq) << ','
       << format_double(s.cross_lap_int) << ',' << format_double(s.energy) << '\n';
}

}  // namespace sllg
