#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sllg/cli/config.hpp"
#include "sllg/diagnostics.hpp"
#include "sllg/ergodic.hpp"
#include "sllg/gibbs.hpp"
#include "sllg/invariants.hpp"
#include "sllg/measures.hpp"
#include "sllg/report_json.hpp"
#include "sllg/sde_sphere.hpp"
#include "sllg/spde.hpp"

namespace sllg::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitGate = 3,
  kExitBlowUp = 4,
  kExitCheckFailed = 5,
};

/// Collects artifacts in memory and writes them once the computation is complete.
class Artifacts {
 public:
  Artifacts(std::filesystem::path dir, const ExperimentConfig& cfg, std::string subcommand)
      : dir_(std::move(dir)), hash_(cfg.hash), seed_(cfg.seed), subcommand_(std::move(subcommand)) {}

  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

  void add_json(const std::string& name, nlohmann::ordered_json j) {
    j["config_hash"] = hash_;
    j["seed"] = seed_;
    add(name, j.dump(2) + "\n");
  }

  void write(bool pass) const {
    std::filesystem::create_directories(dir_);
    nlohmann::ordered_json manifest;
    manifest["tool"] = "sllg";
    manifest["version"] = kVersion;
    manifest["subcommand"] = subcommand_;
    manifest["config_hash"] = hash_;
    manifest["seed"] = seed_;
    manifest["files"] = nlohmann::ordered_json::array();
    for (const auto& [name, content] : files_) {
      std::ofstream out(dir_ / name, std::ios::binary);
      out << content;
      if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
      manifest["files"].push_back(name);
    }
    manifest["pass"] = pass;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  std::string hash_;
  std::uint64_t seed_;
  std::string subcommand_;
  std::map<std::string, std::string> files_;
};

inline std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
  std::ostringstream os;
  os << stem << '_' << std::setw(4) << std::setfill('0') << i << ext;
  return os.str();
}

/// Constant h2 of a spatially constant shape B profile, or the h1 vector of shape A.
inline double constant_h2(const NoiseShape& shape) {
  if (shape.kind() != NoiseKind::kShapeB || !shape.spatially_constant())
    throw ConfigError("this subcommand needs a spatially constant shape B profile");
  return shape.h2()[0];
}

inline Vec3 constant_h1(const NoiseShape& shape) {
  if (shape.kind() != NoiseKind::kShapeA || !shape.spatially_constant())
    throw ConfigError("this subcommand needs a spatially constant shape A profile");
  return shape.h1()[0];
}

struct RunContext {
  ExperimentConfig cfg;
  std::string subcommand;
  std::size_t workers = 1;
  std::ostream* log = nullptr;
};

inline int run_simulate_spde(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto& c = ctx.cfg;
  EnsembleSpec spec{c.params, c.solver, c.simulation_options(), std::max<std::size_t>(1, c.n_trajectories), c.seed};
  const auto recs = run_ensemble(c.initial_field(), c.noise_shape(), spec, ctx.workers);
  nlohmann::ordered_json j;
  j["name"] = "simulate_spde";
  j["n_trajectories"] = recs.size();
  j["n_steps"] = recs.front().n_steps;
  nlohmann::ordered_json finals = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    std::ostringstream summary;
    write_summary_csv(summary, recs[i]);
    art.add(numbered("summary", i, ".csv"), summary.str());
    if (c.snapshot_stride > 0.0) {
      std::ostringstream snaps;
      write_snapshots_csv(snaps, recs[i]);
      art.add(numbered("snapshots", i, ".csv"), snaps.str());
    }
    finals.push_back({{"grad_norm_sq", recs[i].samples.back().grad_norm_sq},
                      {"max_norm_deviation", recs[i].final_state->max_norm_deviation()}});
  }
  j["final"] = finals;
  art.add_json("report.json", j);
  pass = true;
  return kExitOk;
}

inline int run_simulate_sde(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto& c = ctx.cfg;
  const auto shape = c.noise_shape();
  const bool shape_b = shape.kind() == NoiseKind::kShapeB;
  const double h2 = shape_b ? constant_h2(shape) : 0.0;
  const Vec3 h1 = shape_b ? Vec3{} : constant_h1(shape);
  c.params.validate();
  const std::size_t n_chains = std::max<std::size_t>(1, c.n_trajectories);
  const std::size_t n_steps = c.steps_of(c.horizon);
  const std::size_t stride = std::max<std::size_t>(1, c.steps_of(c.sample_stride));
  std::vector<std::string> rows(n_chains);
  parallel_for(n_chains, ctx.workers, [&](std::size_t i) {
    Rng rng(c.seed, i);
    Vec3 v = c.initial.kind == InitialKind::kRandom ? rng.uniform_on_sphere() : normalized(c.initial.direction);
    const double sq = std::sqrt(c.solver.dt);
    std::ostringstream os;
    auto emit = [&](std::size_t k) {
      os << format_double(static_cast<double>(k) * c.solver.dt) << ',' << format_double(v.x) << ','
         << format_double(v.y) << ',' << format_double(v.z) << ',' << i << '\n';
    };
    emit(0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
      v = shape_b ? sde_step_B(v, c.params, h2, sq * rng.normal3(), c.solver.dt)
                  : sde_step_A(v, h1, sq * rng.normal(), c.params, c.solver.dt);
      if (!is_finite(v)) throw BlowUpError("non-finite SDE state", static_cast<double>(k) * c.solver.dt);
      if (k % stride == 0 || k == n_steps) emit(k);
    }
    rows[i] = os.str();
  });
  std::string csv = "time,v1,v2,v3,trajectory_id\n";
  for (const auto& r : rows) csv += r;
  art.add("sde_states.csv", std::move(csv));
  pass = true;
  return kExitOk;
}

inline int run_kb_measure(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto& c = ctx.cfg;
  const auto shape = c.noise_shape();
  KbOptions o;
  o.noise = shape.kind();
  if (o.noise == NoiseKind::kShapeB) o.h2 = constant_h2(shape);
  else o.h1 = constant_h1(shape);
  o.dt = c.solver.dt;
  o.horizon = c.horizon;
  o.burn_in = c.burn_in;
  o.sample_dt = c.sample_stride;
  o.n_chains = std::max<std::size_t>(1, c.n_trajectories);
  o.seed = c.seed;
  o.n_z_bands = c.n_z_bands;
  o.n_phi = c.n_phi;
  const auto kb = run_kb(c.params, o, ctx.workers);

  std::string ref = c.reference;
  if (ref == "auto") ref = c.params.is_zero() ? "uniform" : "gibbs";
  std::vector<double> masses;
  std::function<double(double)> cdf;
  std::optional<GibbsDensity> gibbs;
  if (ref == "uniform") {
    masses = uniform_bin_masses(c.n_z_bands, c.n_phi);
    cdf = uniform_z_cdf;
  } else if (ref == "gibbs") {
    if (o.noise != NoiseKind::kShapeB) throw ConfigError("gibbs reference needs shape B noise");
    gibbs.emplace(GibbsSpec{c.params.lambda2, o.h2, c.params, c.length});
    masses = gibbs->bin_masses(c.n_z_bands, c.n_phi);
    cdf = gibbs->tabulated_z_cdf();
  } else {
    throw ConfigError("measure.reference: expected auto, uniform or gibbs");
  }
  const auto d = distance_report(kb.measure, masses, kb.z_samples, cdf);
  const double n_eff = kb.effective_samples();
  const double ks_crit = ks_critical_1pct(n_eff);
  pass = d.tv <= c.tv_threshold && d.ks_z <= c.ks_factor * ks_crit;

  std::ostringstream csv;
  write_measure_csv(csv, kb.measure, masses);
  art.add("measure.csv", csv.str());
  nlohmann::ordered_json j;
  j["name"] = "kb_measure";
  j["reference"] = ref;
  j["distance"] = to_json(d);
  j["effective_samples"] = n_eff;
  j["ks_critical_1pct"] = ks_crit;
  j["tv_threshold"] = c.tv_threshold;
  j["ks_factor"] = c.ks_factor;
  j["mean_z"] = kb.mean_z();
  j["stderr_z"] = kb.stderr_z();
  j["mean_z2"] = kb.mean_z2();
  j["stderr_z2"] = kb.stderr_z2();
  j["pass"] = pass;
  art.add_json("report.json", j);
  return pass ? kExitOk : kExitCheckFailed;
}

inline int run_check_invariants(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto checks = run_invariant_suite(ctx.cfg.seed);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  pass = true;
  for (const auto& ch : checks) {
    arr.push_back({{"name", ch.name}, {"value", ch.value}, {"tolerance", ch.tolerance}, {"pass", ch.pass}});
    pass = pass && ch.pass;
    if (ctx.log) *ctx.log << (ch.pass ? "PASS " : "FAIL ") << ch.name << " = " << ch.value << "\n";
  }
  art.add_json("invariants.json", {{"name", "check_invariants"}, {"checks", arr}, {"pass", pass}});
  return pass ? kExitOk : kExitCheckFailed;
}

inline int run_inequality(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto& c = ctx.cfg;
  const auto u0 = c.initial_field();
  const auto shape = c.noise_shape();
  const Grid1D grid = c.grid();
  const double growth = noise_growth_rate(shape, grid);
  InequalityReport rep;
  bool monotone_checked = false;
  double monotone_growth = 0.0, monotone_slack = 0.0;
  if (c.inequality_name == "poincare") {
    rep = poincare_cross_check(u0);
  } else {
    if (c.inequality_name == "improved") {
      const auto small = smallness_check(c.params, grid.poincare_constant());
      if (!small.pass) throw GateError("smallness condition violated", small.threshold);
    }
    EnsembleSpec spec{c.params, c.solver, c.simulation_options(), std::max<std::size_t>(1, c.n_trajectories), c.seed};
    const bool monotone_expected = c.inequality_name == "energy" && shape.spatially_constant();
    spec.options.track_step_monotonicity = monotone_expected;
    const auto recs = run_ensemble(u0, shape, spec, ctx.workers);
    if (monotone_expected) {
      double worst = -INFINITY;
      for (const auto& r : recs) worst = std::max(worst, r.max_step_growth);
      monotone_slack = step_growth_slack(c.solver.dt, grid.dx());
      monotone_growth = worst;
      monotone_checked = true;
    }
    if (c.inequality_name == "energy") {
      if (!c.params.is_zero()) throw ConfigError("energy inequality needs g = 0");
      rep = energy_inequality(recs, c.params.lambda2, growth, c.inequality_allowance);
    } else if (c.inequality_name == "anisotropic") {
      rep = anisotropic_energy_inequality(recs, c.params, growth, c.inequality_allowance);
    } else if (c.inequality_name == "improved") {
      rep = improved_anisotropic_inequality(recs, c.params, grid.poincare_constant(), growth, c.inequality_allowance);
    } else if (c.inequality_name == "h2-growth") {
      rep = h2_halfnorm_growth(recs);
    } else {
      throw ConfigError("inequality.name: expected energy, anisotropic, improved, h2-growth or poincare");
    }
    std::ostringstream csv;
    csv << "time,mean_grad_norm_sq,mean_cross_lap_int,mean_energy\n";
    for (std::size_t j = 0; j < recs.front().samples.size(); ++j) {
      double g = 0.0, d = 0.0, e = 0.0;
      for (const auto& r : recs) {
        g += r.samples[j].grad_norm_sq;
        d += r.samples[j].cross_lap_int;
        e += r.samples[j].energy;
      }
      const double n = static_cast<double>(recs.size());
      csv << format_double(recs.front().samples[j].time) << ',' << format_double(g / n) << ','
          << format_double(d / n) << ',' << format_double(e / n) << '\n';
    }
    art.add("trace.csv", csv.str());
  }
  if (c.inequality_name != "poincare") rep.k = c.inequality_k;
  pass = rep.pass();
  auto j = to_json(rep);
  if (monotone_checked) {
    const bool ok = monotone_growth <= monotone_slack;
    j["monotonicity"] = {{"max_step_growth", monotone_growth}, {"slack", monotone_slack}, {"pass", ok}};
    pass = pass && ok;
    j["pass"] = pass;
  }
  art.add_json("report.json", j);
  return pass ? kExitOk : kExitCheckFailed;
}

inline int run_sync(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto& c = ctx.cfg;
  SyncOptions o;
  o.t_list = c.sync_t_list;
  o.horizon = c.sync_horizon;
  o.sample_stride = std::max<std::size_t>(1, c.steps_of(c.sample_stride));
  o.n_paths = std::max<std::size_t>(1, c.n_trajectories);
  o.seed = c.seed;
  o.decay_fraction = c.sync_decay_fraction;
  const auto rep = sync_experiment(c.initial_field(), c.params, c.noise_shape(), c.solver, o, ctx.workers);
  std::ostringstream csv;
  csv << "T,sup_deviation,stderr\n";
  for (std::size_t i = 0; i < rep.t_list.size(); ++i)
    csv << format_double(rep.t_list[i]) << ',' << format_double(rep.sup_deviation[i]) << ','
        << format_double(rep.sup_deviation_stderr[i]) << '\n';
  art.add("sync.csv", csv.str());
  art.add_json("report.json", to_json(rep));
  pass = rep.pass();
  return pass ? kExitOk : kExitCheckFailed;
}

inline int run_feller(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto& c = ctx.cfg;
  FellerOptions o;
  o.perturbations = c.feller_perturbations;
  o.horizon = c.horizon;
  o.sample_stride = std::max<std::size_t>(1, c.steps_of(c.sample_stride));
  o.n_paths = std::max<std::size_t>(1, c.n_trajectories);
  o.calibration_paths = c.feller_calibration_paths;
  o.seed = c.seed;
  o.min_fraction = c.feller_min_fraction;
  const auto rep = feller_experiment(c.initial_field(), c.params, c.noise_shape(), c.solver, o, ctx.workers);
  std::ostringstream csv;
  csv << "perturbation,path,time,gap,ratio\n";
  for (const auto& r : rep.results)
    for (std::size_t p = 0; p < r.curves.size(); ++p)
      for (std::size_t j = 0; j < r.curves[p].times.size(); ++j)
        csv << format_double(r.size) << ',' << p << ',' << format_double(r.curves[p].times[j]) << ','
            << format_double(r.curves[p].gap[j]) << ',' << format_double(r.curves[p].ratio[j]) << '\n';
  art.add("feller.csv", csv.str());
  art.add_json("report.json", to_json(rep));
  pass = rep.pass();
  return pass ? kExitOk : kExitCheckFailed;
}

inline int run_flatness(const RunContext& ctx, Artifacts& art, bool& pass) {
  const auto& c = ctx.cfg;
  const auto shape = c.noise_shape();
  const Grid1D grid = c.grid();
  Vec3 start;
  bool frozen_expected = false;
  if (c.flatness_start == "gibbs") {
    GibbsDensity g(GibbsSpec{c.params.lambda2, constant_h2(shape), c.params, c.length});
    Rng rng(c.seed, 0xf1a7);
    start = g.sample(rng);
  } else if (c.flatness_start == "plus-h1" || c.flatness_start == "minus-h1") {
    const Vec3 h1 = constant_h1(shape);
    if (!c.params.is_zero()) throw ConfigError("frozen h1 start needs g = 0");
    start = (c.flatness_start == "plus-h1" ? 1.0 : -1.0) * normalized(h1);
    frozen_expected = true;
  } else if (c.flatness_start == "fixed") {
    start = normalized(c.initial.direction);
  } else {
    throw ConfigError("flatness.start: expected gibbs, plus-h1, minus-h1 or fixed");
  }
  const auto u0 = SphereField::constant(grid, start);
  SpdeStepper st(grid, c.params, shape, c.solver);
  auto src = IncrementSource::from_rng(c.seed, 0, c.solver.dt, shape.brownian_dimension());
  const auto rep = stationary_flatness(u0, st, c.horizon, src);
  pass = rep.max_grad_norm <= c.flatness_tolerance && (!frozen_expected || rep.max_displacement <= 1e-12);
  auto j = to_json(rep);
  j["name"] = "stationary_flatness";
  j["start"] = {start.x, start.y, start.z};
  j["tolerance"] = c.flatness_tolerance;
  j["frozen_expected"] = frozen_expected;
  j["pass"] = pass;
  art.add_json("report.json", j);
  return pass ? kExitOk : kExitCheckFailed;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate-spde", "simulate-sde", "kb-measure", "check-invariants",
                                              "inequality",    "sync",         "feller-probe", "flatness"};
  return names;
}

/// Runs one subcommand and writes its artifacts. Library exceptions propagate; map them
/// with exit_code_for.
inline int run(const RunContext& ctx) {
  Artifacts art(ctx.cfg.output_directory, ctx.cfg, ctx.subcommand);
  bool pass = false;
  int code = kExitOk;
  const auto& s = ctx.subcommand;
  if (s == "simulate-spde") code = run_simulate_spde(ctx, art, pass);
  else if (s == "simulate-sde") code = run_simulate_sde(ctx, art, pass);
  else if (s == "kb-measure") code = run_kb_measure(ctx, art, pass);
  else if (s == "check-invariants") code = run_check_invariants(ctx, art, pass);
  else if (s == "inequality") code = run_inequality(ctx, art, pass);
  else if (s == "sync") code = run_sync(ctx, art, pass);
  else if (s == "feller-probe") code = run_feller(ctx, art, pass);
  else if (s == "flatness") code = run_flatness(ctx, art, pass);
  else throw ConfigError("unknown subcommand " + s);
  art.write(pass);
  return code;
}

/// Maps the library's exception types onto the documented exit codes.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const GateError*>(&e)) return kExitGate;
  if (dynamic_cast<const BlowUpError*>(&e)) return kExitBlowUp;
  return kExitConfig;
}

}  // namespace sllg::cli
