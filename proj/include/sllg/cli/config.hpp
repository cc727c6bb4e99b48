#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sllg/anisotropy.hpp"
#include "sllg/errors.hpp"
#include "sllg/field.hpp"
#include "sllg/noise_shape.hpp"
#include "sllg/rng.hpp"
#include "sllg/spde.hpp"

namespace sllg::cli {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

enum class ProfileKind { kConstant, kSine, kTanhWall };

/// h(x) = value (offset + amplitude s(x)) with s = 1, sin(pi x / L) or tanh((x - L/2) / width).
struct ProfileSpec {
  ProfileKind kind = ProfileKind::kConstant;
  double offset = 0.0;
  double amplitude = 1.0;
  double width = 0.1;

  double shape_at(double x, double length) const {
    switch (kind) {
      case ProfileKind::kConstant: return offset + amplitude;
      case ProfileKind::kSine: return offset + amplitude * std::sin(std::numbers::pi * x / length);
      case ProfileKind::kTanhWall: return offset + amplitude * std::tanh((x - 0.5 * length) / width);
    }
    return 0.0;
  }
};

enum class InitialKind { kConstant, kTwist, kTilt, kRandom };

struct InitialSpec {
  InitialKind kind = InitialKind::kTwist;
  Vec3 direction{0.0, 0.0, 1.0};
  double epsilon = 0.5;
};

struct ExperimentConfig {
  std::size_t n_points = 64;
  double length = 1.0;

  AnisotropyParams params{};

  NoiseKind noise_kind = NoiseKind::kShapeB;
  ProfileSpec profile{};
  double h2_value = 1.0;
  Vec3 h1_value{0.0, 0.0, 1.0};
  std::uint64_t seed = 0;

  SolverConfig solver{};

  double horizon = 1.0;
  std::size_t n_trajectories = 1;
  double sample_stride = 0.1;
  double snapshot_stride = 0.0;
  double burn_in = 0.0;
  double window = 0.0;

  InitialSpec initial{};

  std::size_t n_z_bands = 16;
  std::size_t n_phi = 16;
  std::string reference = "auto";
  double tv_threshold = 0.03;
  double ks_factor = 1.5;

  std::string output_directory = "out";

  std::string inequality_name = "energy";
  double inequality_allowance = 0.0;
  double inequality_k = 3.0;

  std::vector<double> sync_t_list{0.0, 1.0, 2.0, 4.0, 8.0};
  double sync_horizon = 0.0;
  double sync_decay_fraction = 0.2;

  std::vector<double> feller_perturbations{1e-3, 5e-4};
  std::size_t feller_calibration_paths = 64;
  double feller_min_fraction = 0.95;

  std::string flatness_start = "gibbs";
  double flatness_tolerance = 1e-10;

  std::string hash;

  Grid1D grid() const { return Grid1D(n_points, length); }

  NoiseShape noise_shape() const {
    const Grid1D g = grid();
    if (noise_kind == NoiseKind::kShapeB) {
      std::vector<double> h(g.n_points());
      for (std::size_t i = 0; i < h.size(); ++i) h[i] = h2_value * profile.shape_at(g.node(i), g.length());
      return NoiseShape::shape_b(std::move(h));
    }
    std::vector<Vec3> h(g.n_points());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = profile.shape_at(g.node(i), g.length()) * h1_value;
    return NoiseShape::shape_a(std::move(h));
  }

  std::size_t steps_of(double time) const {
    return static_cast<std::size_t>(std::llround(time / solver.dt));
  }

  SimulationOptions simulation_options() const {
    SimulationOptions o;
    o.horizon = horizon;
    o.sample_stride = std::max<std::size_t>(1, steps_of(sample_stride));
    o.snapshot_stride = snapshot_stride > 0.0 ? std::max<std::size_t>(1, steps_of(snapshot_stride)) : 0;
    o.window = window > 0.0 ? steps_of(window) : 0;
    return o;
  }

  SphereField initial_field() const {
    const Grid1D g = grid();
    const double k = std::numbers::pi / g.length();
    switch (initial.kind) {
      case InitialKind::kConstant: return SphereField::constant(g, initial.direction);
      case InitialKind::kTwist: {
        const double eps = initial.epsilon;
        return SphereField::from_function(g, [=](double x) {
          const double phi = eps * std::cos(k * x);
          return Vec3{std::cos(phi), std::sin(phi), 0.0};
        });
      }
      case InitialKind::kTilt: {
        const double eps = initial.epsilon;
        return SphereField::from_function(g, [=](double x) { return Vec3{eps * std::cos(k * x), 0.0, 1.0}; });
      }
      case InitialKind::kRandom: {
        Rng rng(seed, 0xfeed);
        const Vec3 a = rng.normal3(), b = rng.normal3(), c = rng.normal3();
        return SphereField::from_function(g, [=](double x) {
          return a + std::cos(k * x) * b + 0.5 * std::cos(2.0 * k * x) * c + Vec3{0.0, 0.0, 0.1};
        });
      }
    }
    throw ConfigError("unknown initial field kind");
  }
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& key, std::string text) {
  for (char& c : text)
    if (c == ',') c = ' ';
  std::istringstream is(text);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) throw ConfigError("config key " + key + ": not a number list");
  return out;
}

class Reader {
 public:
  explicit Reader(const boost::property_tree::ptree& t) : t_(t) {}

  double number(const std::string& key, double fallback) const {
    const auto v = t_.get_optional<std::string>(key);
    if (!v) return fallback;
    const auto xs = parse_numbers(key, *v);
    if (xs.size() != 1) throw ConfigError("config key " + key + ": expected one number");
    return xs[0];
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("config key " + key + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    const auto v = t_.get_optional<std::string>(key);
    return v ? parse_numbers(key, *v) : fallback;
  }

  Vec3 vec(const std::string& key, Vec3 fallback) const {
    const auto v = t_.get_optional<std::string>(key);
    if (!v) return fallback;
    const auto xs = parse_numbers(key, *v);
    if (xs.size() != 3) throw ConfigError("config key " + key + ": expected three numbers");
    return {xs[0], xs[1], xs[2]};
  }

  std::string text(const std::string& key, std::string fallback) const {
    return t_.get<std::string>(key, fallback);
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto v = t_.get_optional<std::string>(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError("config key " + key + ": expected a boolean");
  }

 private:
  const boost::property_tree::ptree& t_;
};

}  // namespace detail

/// Parses the INI-style schema documented in the README ([grid], [params], [noise],
/// [solver], [run], [initial], [measure], [output], plus per-experiment sections).
inline ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream is(text);
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  const detail::Reader r(tree);
  ExperimentConfig c;
  c.hash = hex64(fnv1a(text));

  c.n_points = r.count("grid.n_points", c.n_points);
  c.length = r.number("grid.length", c.length);

  c.params.lambda1 = r.number("params.lambda1", 0.0);
  c.params.lambda2 = r.number("params.lambda2", 1.0);
  const auto a = r.list("params.A", std::vector<double>(9, 0.0));
  if (a.size() != 9) throw ConfigError("params.A: expected nine numbers, row-major");
  for (std::size_t i = 0; i < 9; ++i) c.params.A.a[i] = a[i];
  c.params.b = r.vec("params.b", {});
  const auto conv = r.text("params.convention", "llg");
  if (conv == "llg") c.params.convention = DriftConvention::kLlgEquation;
  else if (conv == "energy-gradient") c.params.convention = DriftConvention::kEnergyGradient;
  else throw ConfigError("params.convention: expected llg or energy-gradient");

  const auto shape = r.text("noise.shape", "B");
  if (shape == "A") c.noise_kind = NoiseKind::kShapeA;
  else if (shape == "B") c.noise_kind = NoiseKind::kShapeB;
  else throw ConfigError("noise.shape: expected A or B");
  const auto prof = r.text("noise.profile", "constant");
  if (prof == "constant") c.profile.kind = ProfileKind::kConstant;
  else if (prof == "sine") c.profile.kind = ProfileKind::kSine;
  else if (prof == "tanh-wall") c.profile.kind = ProfileKind::kTanhWall;
  else throw ConfigError("noise.profile: expected constant, sine or tanh-wall");
  c.profile.offset = r.number("noise.offset", 0.0);
  c.profile.amplitude = r.number("noise.amplitude", 1.0);
  c.profile.width = r.number("noise.width", 0.1);
  if (!(c.profile.width > 0.0)) throw ConfigError("noise.width must be positive");
  if (c.noise_kind == NoiseKind::kShapeB) c.h2_value = r.number("noise.value", 1.0);
  else c.h1_value = r.vec("noise.value", c.h1_value);
  try {
    const auto seed_text = r.text("noise.seed", "0");
    if (seed_text.find('-') != std::string::npos) throw ConfigError("negative seed");
    c.seed = std::stoull(seed_text);
  } catch (const std::exception&) {
    throw ConfigError("noise.seed: expected an unsigned integer");
  }

  c.solver.dt = r.number("solver.dt", c.solver.dt);
  const auto scheme = r.text("solver.scheme", "strang");
  if (scheme == "strang") c.solver.scheme = Scheme::kStrangRotation;
  else if (scheme == "ito-euler") c.solver.scheme = Scheme::kItoEulerProject;
  else if (scheme == "heun") c.solver.scheme = Scheme::kStratonovichHeunProject;
  else throw ConfigError("solver.scheme: expected strang, ito-euler or heun");
  c.solver.cfl_safety = r.number("solver.safety", c.solver.cfl_safety);
  c.solver.renormalize_after_drift = r.flag("solver.renormalize", true);

  c.horizon = r.number("run.horizon", c.horizon);
  c.n_trajectories = r.count("run.n_trajectories", c.n_trajectories);
  c.sample_stride = r.number("run.sample_stride", c.sample_stride);
  c.snapshot_stride = r.number("run.snapshot_stride", c.snapshot_stride);
  c.burn_in = r.number("run.burn_in", c.burn_in);
  c.window = r.number("run.window", c.window);

  const auto init = r.text("initial.kind", "twist");
  if (init == "constant") c.initial.kind = InitialKind::kConstant;
  else if (init == "twist") c.initial.kind = InitialKind::kTwist;
  else if (init == "tilt") c.initial.kind = InitialKind::kTilt;
  else if (init == "random") c.initial.kind = InitialKind::kRandom;
  else throw ConfigError("initial.kind: expected constant, twist, tilt or random");
  c.initial.direction = r.vec("initial.direction", c.initial.direction);
  c.initial.epsilon = r.number("initial.epsilon", c.initial.epsilon);

  c.n_z_bands = r.count("measure.n_z_bands", c.n_z_bands);
  c.n_phi = r.count("measure.n_phi", c.n_phi);
  c.reference = r.text("measure.reference", c.reference);
  c.tv_threshold = r.number("measure.tv_threshold", c.tv_threshold);
  c.ks_factor = r.number("measure.ks_factor", c.ks_factor);

  c.output_directory = r.text("output.directory", c.output_directory);

  c.inequality_name = r.text("inequality.name", c.inequality_name);
  c.inequality_allowance = r.number("inequality.allowance", c.inequality_allowance);
  c.inequality_k = r.number("inequality.k", c.inequality_k);

  c.sync_t_list = r.list("sync.t_list", c.sync_t_list);
  c.sync_horizon = r.number("sync.horizon", c.sync_horizon);
  c.sync_decay_fraction = r.number("sync.decay_fraction", c.sync_decay_fraction);

  c.feller_perturbations = r.list("feller.perturbations", c.feller_perturbations);
  c.feller_calibration_paths = r.count("feller.calibration_paths", c.feller_calibration_paths);
  c.feller_min_fraction = r.number("feller.min_fraction", c.feller_min_fraction);

  c.flatness_start = r.text("flatness.start", c.flatness_start);
  c.flatness_tolerance = r.number("flatness.tolerance", c.flatness_tolerance);

  // Structural validation; gates (CFL, smallness) are evaluated by the runner.
  (void)c.grid();
  c.params.validate();
  c.solver.validate();
  if (!(c.horizon >= 0.0)) throw ConfigError("run.horizon must be nonnegative");
  if (!(c.sample_stride > 0.0)) throw ConfigError("run.sample_stride must be positive");
  if (c.n_z_bands == 0 || c.n_phi == 0) throw ConfigError("measure bins must be positive");
  (void)c.noise_shape();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace sllg::cli
