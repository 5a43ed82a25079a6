#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "drainguard/errors.hpp"
#include "drainguard/grid.hpp"
#include "drainguard/model.hpp"
#include "drainguard/rl.hpp"

namespace drainguard {

enum class DpExecution { stationary, nonstationary };

struct PlanningConfig {
  std::vector<int> h_list{1, 2, 5, 10, 20, 40, 60, 100, 150, 200, 300, 400};
  int h_anchor = 60;       // reference curve C gamma^H passes through the gap here
  int h_trajectory = 150;  // DP horizon for the trajectory overlay
  std::vector<double> load_fractions{0.05, 0.5, 0.98};
  double vi_tol = 1e-9;
  int vi_max_sweeps = 5000;
  DpExecution dp_execution = DpExecution::stationary;

  friend bool operator==(const PlanningConfig&, const PlanningConfig&) = default;
};

struct OffgridConfig {
  std::size_t n_samp = 30;
  double half_width = 5.0;
  SystemState center{0.0, 0.0, 0.0, 0.0};
  std::size_t t_eval = 1500;
  std::size_t traj_len = 120;
  SystemState traj_start{0.0, 0.0, 0.0, 0.0};

  friend bool operator==(const OffgridConfig&, const OffgridConfig&) = default;
};

struct ExperimentConfig {
  SystemParams system;
  std::vector<TenantType> tenants = baseline_tenant_types();
  GridConfig grid;
  PlanningConfig planning;
  OffgridConfig offgrid;
  TrainConfig rl;  // rl.seed is ignored; `seed` below drives every stream
  BurstConfig burst;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  TrainConfig train_config() const {
    TrainConfig t = rl;
    t.seed = seed;
    return t;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

using Json = nlohmann::ordered_json;

inline void check_keys(const Json& obj, const char* section,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string("section '") + section + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in " + section);
}

template <class T>
void read(const Json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline Json state_json(const SystemState& s) { return Json::array({s.q, s.s, s.b, s.s_tar_prev}); }

inline void read_state(const Json& obj, const char* key, SystemState& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 4)
    throw ConfigError(std::string("'") + key + "' must be [q, s, b, s_tar_prev]");
  out = SystemState{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
                    v[3].get<double>()};
}

inline Json slo_json(const ExtendedReal& slo) {
  return slo.finite() ? Json(slo.value()) : Json("inf");
}

inline ExtendedReal read_slo(const Json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return ExtendedReal::infinity();
    throw ConfigError("slo must be a number or \"inf\"");
  }
  if (!v.is_number()) throw ConfigError("slo must be a number or \"inf\"");
  return v.get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  using detail::Json;
  Json j;
  const auto& p = c.system;
  j["system"] = {{"delta", p.delta},     {"gamma", p.gamma}, {"mu", p.mu},
                 {"eps_delay", p.eps_delay}, {"q_max", p.q_max}, {"s_max", p.s_max},
                 {"b_max", p.b_max},     {"p_min", p.p_min}, {"p_max", p.p_max},
                 {"omega", p.omega},     {"nu", p.nu},       {"chi", p.chi},
                 {"c_op", p.c_op},       {"c_b", p.c_b},     {"eta_tar", p.eta_tar},
                 {"phi0", p.phi0},       {"zeta", p.zeta}};
  j["tenants"] = Json::array();
  for (const auto& t : c.tenants)
    j["tenants"].push_back(
        {{"w", t.w}, {"slo", detail::slo_json(t.slo)}, {"delta_k", t.delta_k}, {"rho", t.rho}});
  const auto& g = c.grid;
  j["grid"] = {{"q_fine_step", g.q_fine_step},     {"q_fine_until", g.q_fine_until},
               {"q_coarse_step", g.q_coarse_step}, {"s_step", g.s_step},
               {"b_step", g.b_step},               {"s_tar_prev_step", g.s_tar_prev_step},
               {"p_step", g.p_step},               {"s_tar_step", g.s_tar_step}};
  const auto& pl = c.planning;
  j["planning"] = {{"h_list", pl.h_list},
                   {"h_anchor", pl.h_anchor},
                   {"h_trajectory", pl.h_trajectory},
                   {"load_fractions", pl.load_fractions},
                   {"vi_tol", pl.vi_tol},
                   {"vi_max_sweeps", pl.vi_max_sweeps},
                   {"dp_execution", pl.dp_execution == DpExecution::stationary ? "stationary"
                                                                               : "nonstationary"}};
  const auto& o = c.offgrid;
  j["offgrid"] = {{"n_samp", o.n_samp},
                  {"half_width", o.half_width},
                  {"center", detail::state_json(o.center)},
                  {"t_eval", o.t_eval},
                  {"traj_len", o.traj_len},
                  {"traj_start", detail::state_json(o.traj_start)}};
  const auto& r = c.rl;
  j["rl"] = {{"episodes", r.episodes},
             {"episode_len", r.episode_len},
             {"alpha", r.alpha},
             {"eps_start", r.eps_start},
             {"eps_end", r.eps_end},
             {"eps_decay_fraction", r.eps_decay_fraction},
             {"eval_every", r.eval_every},
             {"eval_len", r.eval_len},
             {"start_mode", r.start_mode == StartMode::fixed ? "fixed" : "uniform_grid"},
             {"start_state", detail::state_json(r.start_state)},
             {"eval_start", detail::state_json(r.eval_start)},
             {"unsafe_rule",
              r.unsafe_rule == UnsafeRule::with_margin ? "with_margin" : "margin_free"}};
  const auto& b = c.burst;
  j["burst"] = {{"start", b.start},
                {"end", b.end},
                {"factor", b.factor},
                {"s0", detail::state_json(b.s0)},
                {"length", b.length}};
  j["output"] = {{"dir", c.output_dir}};
  j["seed"] = c.seed;
  return j;
}

// Missing sections and keys keep their defaults; unknown keys are errors.
// The instance (system + tenants) is validated before returning.
inline ExperimentConfig config_from_json(const nlohmann::ordered_json& j) {
  using detail::read;
  using detail::read_state;
  ExperimentConfig c;
  detail::check_keys(j, "config",
                     {"system", "tenants", "grid", "planning", "offgrid", "rl", "burst", "output",
                      "seed"});
  if (j.contains("system")) {
    const auto& s = j.at("system");
    detail::check_keys(s, "system",
                       {"delta", "gamma", "mu", "eps_delay", "q_max", "s_max", "b_max", "p_min",
                        "p_max", "omega", "nu", "chi", "c_op", "c_b", "eta_tar", "phi0", "zeta"});
    auto& p = c.system;
    read(s, "delta", p.delta), read(s, "gamma", p.gamma), read(s, "mu", p.mu);
    read(s, "eps_delay", p.eps_delay), read(s, "q_max", p.q_max), read(s, "s_max", p.s_max);
    read(s, "b_max", p.b_max), read(s, "p_min", p.p_min), read(s, "p_max", p.p_max);
    read(s, "omega", p.omega), read(s, "nu", p.nu), read(s, "chi", p.chi);
    read(s, "c_op", p.c_op), read(s, "c_b", p.c_b), read(s, "eta_tar", p.eta_tar);
    read(s, "phi0", p.phi0), read(s, "zeta", p.zeta);
  }
  if (j.contains("tenants")) {
    const auto& arr = j.at("tenants");
    if (!arr.is_array()) throw ConfigError("'tenants' must be an array");
    c.tenants.clear();
    for (const auto& t : arr) {
      detail::check_keys(t, "tenants[]", {"w", "slo", "delta_k", "rho"});
      for (const char* key : {"w", "slo", "delta_k", "rho"})
        if (!t.contains(key)) throw ConfigError(std::string("tenant is missing '") + key + "'");
      TenantType tt;
      read(t, "w", tt.w);
      tt.slo = detail::read_slo(t.at("slo"));
      read(t, "delta_k", tt.delta_k);
      read(t, "rho", tt.rho);
      c.tenants.push_back(tt);
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::check_keys(g, "grid",
                       {"q_fine_step", "q_fine_until", "q_coarse_step", "s_step", "b_step",
                        "s_tar_prev_step", "p_step", "s_tar_step"});
    read(g, "q_fine_step", c.grid.q_fine_step), read(g, "q_fine_until", c.grid.q_fine_until);
    read(g, "q_coarse_step", c.grid.q_coarse_step), read(g, "s_step", c.grid.s_step);
    read(g, "b_step", c.grid.b_step), read(g, "s_tar_prev_step", c.grid.s_tar_prev_step);
    read(g, "p_step", c.grid.p_step), read(g, "s_tar_step", c.grid.s_tar_step);
  }
  if (j.contains("planning")) {
    const auto& p = j.at("planning");
    detail::check_keys(p, "planning",
                       {"h_list", "h_anchor", "h_trajectory", "load_fractions", "vi_tol",
                        "vi_max_sweeps", "dp_execution"});
    auto& pl = c.planning;
    read(p, "h_list", pl.h_list), read(p, "h_anchor", pl.h_anchor);
    read(p, "h_trajectory", pl.h_trajectory), read(p, "load_fractions", pl.load_fractions);
    read(p, "vi_tol", pl.vi_tol), read(p, "vi_max_sweeps", pl.vi_max_sweeps);
    std::string mode = pl.dp_execution == DpExecution::stationary ? "stationary" : "nonstationary";
    read(p, "dp_execution", mode);
    if (mode != "stationary" && mode != "nonstationary")
      throw ConfigError("dp_execution must be stationary or nonstationary");
    pl.dp_execution = mode == "stationary" ? DpExecution::stationary : DpExecution::nonstationary;
    for (int h : pl.h_list)
      if (h < 1) throw ConfigError("planning.h_list entries must be >= 1");
    if (pl.h_anchor < 1 || pl.h_trajectory < 1) throw ConfigError("horizons must be >= 1");
  }
  if (j.contains("offgrid")) {
    const auto& o = j.at("offgrid");
    detail::check_keys(o, "offgrid",
                       {"n_samp", "half_width", "center", "t_eval", "traj_len", "traj_start"});
    read(o, "n_samp", c.offgrid.n_samp), read(o, "half_width", c.offgrid.half_width);
    read_state(o, "center", c.offgrid.center), read(o, "t_eval", c.offgrid.t_eval);
    read(o, "traj_len", c.offgrid.traj_len), read_state(o, "traj_start", c.offgrid.traj_start);
    if (c.offgrid.n_samp < 1) throw ConfigError("offgrid.n_samp must be >= 1");
  }
  if (j.contains("rl")) {
    const auto& r = j.at("rl");
    detail::check_keys(r, "rl",
                       {"episodes", "episode_len", "alpha", "eps_start", "eps_end",
                        "eps_decay_fraction", "eval_every", "eval_len", "start_mode",
                        "start_state", "eval_start", "unsafe_rule"});
    auto& t = c.rl;
    read(r, "episodes", t.episodes), read(r, "episode_len", t.episode_len);
    read(r, "alpha", t.alpha), read(r, "eps_start", t.eps_start), read(r, "eps_end", t.eps_end);
    read(r, "eps_decay_fraction", t.eps_decay_fraction), read(r, "eval_every", t.eval_every);
    read(r, "eval_len", t.eval_len);
    read_state(r, "start_state", t.start_state), read_state(r, "eval_start", t.eval_start);
    std::string start = t.start_mode == StartMode::fixed ? "fixed" : "uniform_grid";
    read(r, "start_mode", start);
    if (start != "fixed" && start != "uniform_grid")
      throw ConfigError("rl.start_mode must be fixed or uniform_grid");
    t.start_mode = start == "fixed" ? StartMode::fixed : StartMode::uniform_grid;
    std::string rule = t.unsafe_rule == UnsafeRule::with_margin ? "with_margin" : "margin_free";
    read(r, "unsafe_rule", rule);
    if (rule != "with_margin" && rule != "margin_free")
      throw ConfigError("rl.unsafe_rule must be with_margin or margin_free");
    t.unsafe_rule = rule == "with_margin" ? UnsafeRule::with_margin : UnsafeRule::margin_free;
    if (t.eval_every < 1) throw ConfigError("rl.eval_every must be >= 1");
  }
  if (j.contains("burst")) {
    const auto& b = j.at("burst");
    detail::check_keys(b, "burst", {"start", "end", "factor", "s0", "length"});
    read(b, "start", c.burst.start), read(b, "end", c.burst.end);
    read(b, "factor", c.burst.factor), read_state(b, "s0", c.burst.s0);
    read(b, "length", c.burst.length);
  }
  if (j.contains("output")) {
    detail::check_keys(j.at("output"), "output", {"dir"});
    read(j.at("output"), "dir", c.output_dir);
  }
  read(j, "seed", c.seed);

  validate_params(c.system);
  validate_population(c.tenants);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

inline std::string dump_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace drainguard
