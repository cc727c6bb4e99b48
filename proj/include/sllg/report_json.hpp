#pragma once

#include "json.hpp"

#include "sllg/diagnostics.hpp"
#include "sllg/measures.hpp"

namespace sllg {

inline nlohmann::ordered_json to_json(const InequalityReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["slack"] = r.slack();
  j["stderr"] = r.mc_stderr;
  j["k"] = r.k;
  j["allowance"] = r.allowance;
  j["constants"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.constants) j["constants"][k] = v;
  j["pass"] = r.pass();
  return j;
}

inline nlohmann::ordered_json to_json(const SyncReport& r) {
  nlohmann::ordered_json j;
  j["name"] = "sync_experiment";
  j["t_list"] = r.t_list;
  j["horizon"] = r.horizon;
  j["sup_deviation"] = r.sup_deviation;
  j["sup_deviation_stderr"] = r.sup_deviation_stderr;
  j["decay_ratio"] = r.decay_ratio();
  j["decay_fraction"] = r.decay_fraction;
  j["alpha_mean"] = r.alpha_mean;
  j["alpha_bound_ok"] = r.alpha_bound_ok;
  j["max_tail_bound"] = r.max_tail_bound;
  nlohmann::ordered_json alphas = nlohmann::ordered_json::array();
  for (const auto& p : r.paths) alphas.push_back({{"alpha", p.alpha}, {"bound", p.alpha_bound}});
  j["paths"] = alphas;
  j["pass"] = r.pass();
  return j;
}

inline nlohmann::ordered_json to_json(const MeasureDistanceReport& r) {
  return {{"tv", r.tv}, {"ks_z", r.ks_z}, {"sample_count", r.sample_count}};
}

inline nlohmann::ordered_json to_json(const FlatnessReport& r) {
  return {{"max_grad_norm", r.max_grad_norm}, {"max_displacement", r.max_displacement}, {"n_steps", r.n_steps}};
}

inline nlohmann::ordered_json to_json(const FellerReport& r) {
  nlohmann::ordered_json j;
  j["name"] = "feller_probe";
  j["zero_gap_max"] = r.zero_gap_max;
  nlohmann::ordered_json rs = nlohmann::ordered_json::array();
  for (const auto& x : r.results)
    rs.push_back({{"perturbation", x.size},
                  {"envelope_a", x.fit.a},
                  {"envelope_c", x.fit.c},
                  {"fraction_bounded", x.fraction},
                  {"mean_final_gap", x.mean_final_gap}});
  j["perturbations"] = rs;
  j["first_order_ratio"] = r.first_order_ratio();
  j["first_order_ok"] = r.first_order_ok();
  j["min_fraction"] = r.min_fraction;
  j["pass"] = r.pass();
  return j;
}

}  // namespace sllg
