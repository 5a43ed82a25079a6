#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "drainguard/checksum.hpp"
#include "drainguard/config.hpp"
#include "drainguard/csv.hpp"
#include "drainguard/grid.hpp"
#include "drainguard/persist.hpp"
#include "drainguard/rl.hpp"
#include "drainguard/rollout.hpp"
#include "drainguard/solve.hpp"
#include "drainguard/table.hpp"

namespace drainguard {

// Everything the experiments share for one config: the validated instance,
// the grid, and lazily built tables, VI solution and trained Q tables.
// Tables and the VI solution are read from the output directory when
// build-tables / plan-vi left them there; a file built for another instance
// is a StaleFileError.
class Workspace {
 public:
  explicit Workspace(ExperimentConfig cfg, std::ostream* log = nullptr)
      : cfg_(std::move(cfg)),
        params_(validate_params(cfg_.system)),
        pop_(validate_population(cfg_.tenants)),
        grid_(build_grid(params_, cfg_.grid)),
        hash_(instance_hash(params_, pop_, grid_)),
        log_(log) {}

  const ExperimentConfig& config() const { return cfg_; }
  const SystemParams& params() const { return params_; }
  const Population& population() const { return pop_; }
  const GridSpec& grid() const { return grid_; }
  std::uint64_t hash() const { return hash_; }
  std::filesystem::path out_dir() const { return cfg_.output_dir; }

  static std::string table_file(bool shielded) {
    return shielded ? "table_shielded.bin" : "table_unshielded.bin";
  }
  static std::string vi_file() { return "values_vi.bin"; }

  const GuardedTable& table(bool shielded) {
    auto& slot = shielded ? shielded_ : unshielded_;
    if (slot) return *slot;
    const auto path = out_dir() / table_file(shielded);
    if (std::filesystem::exists(path)) {
      note("loading " + path.string());
      slot = load_table(path, hash_);
      if (slot->shielded != shielded) throw ConfigError(path.string() + " has the wrong shield flag");
      if (slot->num_states != grid_.num_states() || slot->num_actions != grid_.num_actions())
        throw StaleFileError(path.string() + " does not match the grid");
    } else {
      note(std::string("building ") + (shielded ? "shielded" : "unshielded") + " table");
      slot = build_table(grid_, pop_, params_, shielded);
    }
    return *slot;
  }

  const ValueFunction& vi() {
    if (vi_) return *vi_;
    const auto path = out_dir() / vi_file();
    if (std::filesystem::exists(path)) {
      note("loading " + path.string());
      auto stored = load_values(path, hash_);
      if (stored.gamma != params_.gamma || !stored.shielded || stored.horizon != 0)
        throw StaleFileError(path.string() + " holds a different solution");
      vi_ = std::move(stored.solution);
    } else {
      note("running value iteration");
      const auto r = value_iteration(table(true), params_.gamma, cfg_.planning.vi_tol,
                                     cfg_.planning.vi_max_sweeps);
      note("value iteration: " + std::to_string(r.sweeps) + " sweeps");
      vi_ = r.solution;
    }
    return *vi_;
  }

  const TrainResult& trained(bool shielded) {
    auto& slot = rl_[shielded ? 1 : 0];
    if (!slot) {
      note(std::string("training ") + (shielded ? "shielded" : "unshielded") + " arm");
      slot = train(table(shielded), grid_, pop_, params_, cfg_.train_config());
    }
    return *slot;
  }

  void note(const std::string& msg) const {
    if (log_) *log_ << msg << '\n' << std::flush;
  }

 private:
  ExperimentConfig cfg_;
  SystemParams params_;
  Population pop_;
  GridSpec grid_;
  std::uint64_t hash_;
  std::ostream* log_;
  std::optional<GuardedTable> shielded_, unshielded_;
  std::optional<ValueFunction> vi_;
  std::optional<TrainResult> rl_[2];
};

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// ---- Exp 1: relative value gap vs planning horizon ----

struct Exp1Row {
  int horizon = 0;
  std::string load_label;
  double gap = 0.0;
  double reference = 0.0;
};

inline std::vector<std::string> load_labels(const std::vector<double>& fractions) {
  if (fractions.size() == 3) return {"q_low", "q_mid", "q_high"};
  std::vector<std::string> out;
  for (double f : fractions) out.push_back("q=" + format_number(f));
  return out;
}

// Each load's reference curve is C gamma^H with C chosen so it meets that
// load's gap at the anchor horizon.
inline std::vector<Exp1Row> run_exp1(Workspace& ws) {
  const auto& pl = ws.config().planning;
  const auto& params = ws.params();
  const auto& grid = ws.grid();
  const auto& v_inf = ws.vi().values;
  auto horizons = pl.h_list;
  horizons.push_back(pl.h_anchor);
  ws.note("exp1: horizon sweep");
  const auto sweep = dp_horizon_sweep(ws.table(true), params.gamma, horizons, true);

  const auto labels = load_labels(pl.load_fractions);
  std::vector<Exp1Row> rows;
  for (std::size_t i = 0; i < pl.load_fractions.size(); ++i) {
    const SystemState s0{pl.load_fractions[i] * params.q_max, 0.0, 0.0, 0.0};
    const std::size_t idx = nearest_state_index(grid, s0);
    const double anchor = gap_rel(v_inf[idx], sweep.values.at(pl.h_anchor)[idx]);
    for (int h : pl.h_list) {
      Exp1Row r;
      r.horizon = h;
      r.load_label = labels[i];
      r.gap = gap_rel(v_inf[idx], sweep.values.at(h)[idx]);
      r.reference = anchor * std::pow(params.gamma, h - pl.h_anchor);
      rows.push_back(r);
    }
  }
  ensure_dir(ws.out_dir());
  CsvWriter csv(ws.out_dir() / "exp1_gap.csv", {"H", "load_label", "gap", "reference"});
  for (const auto& r : rows) csv.row(r.horizon, r.load_label, r.gap, r.reference);
  csv.close();
  return rows;
}

// ---- Exp 2: off-grid return gap and backlog traces ----

struct Exp2Result {
  std::map<int, double> gap_off;            // H -> mean relative off-grid gap
  std::vector<double> vi_trace, dp_trace;   // backlog along the trajectory
  int trace_horizon = 0;
};

inline Exp2Result run_exp2(Workspace& ws) {
  const auto& cfg = ws.config();
  const auto& pl = cfg.planning;
  const auto& off = cfg.offgrid;
  const auto& params = ws.params();
  const auto& grid = ws.grid();
  const auto& pop = ws.population();
  const auto& table = ws.table(true);
  const Policy vi_policy = ws.vi().policy;
  const auto vi_lookup = stationary_policy(vi_policy);

  auto horizons = pl.h_list;
  horizons.push_back(pl.h_trajectory);
  std::map<int, Policy> stationary;
  std::map<int, std::vector<Policy>> stages;
  ws.note("exp2: DP policies");
  if (pl.dp_execution == DpExecution::stationary) {
    stationary = dp_horizon_sweep(table, params.gamma, horizons, false).policies;
  } else {
    for (int h : horizons)
      if (!stages.count(h)) stages[h] = backward_dp(table, params.gamma, h, true).stage_policies;
  }
  auto dp_lookup = [&](int h) {
    return pl.dp_execution == DpExecution::stationary ? stationary_policy(stationary.at(h))
                                                      : nonstationary_policy(stages.at(h));
  };

  ws.note("exp2: off-grid returns");
  const auto starts = perturbed_starts(off.center, off.half_width, off.n_samp, params, cfg.seed);
  std::vector<double> j_vi;
  for (const auto& s0 : starts)
    j_vi.push_back(offgrid_rollout(grid, vi_lookup, s0, pop, params, off.t_eval).discounted_return);

  Exp2Result out;
  for (int h : pl.h_list) {
    const auto lookup = dp_lookup(h);
    double total = 0.0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const double j_dp =
          offgrid_rollout(grid, lookup, starts[i], pop, params, off.t_eval).discounted_return;
      total += gap_rel(j_vi[i], j_dp);
    }
    out.gap_off[h] = total / static_cast<double>(starts.size());
  }

  out.trace_horizon = pl.h_trajectory;
  const auto vi_roll = offgrid_rollout(grid, vi_lookup, off.traj_start, pop, params, off.traj_len);
  const auto dp_roll =
      offgrid_rollout(grid, dp_lookup(pl.h_trajectory), off.traj_start, pop, params, off.traj_len);

  ensure_dir(ws.out_dir());
  CsvWriter gap_csv(ws.out_dir() / "exp2_gap.csv", {"H", "gap_off"});
  for (const auto& [h, g] : out.gap_off) gap_csv.row(h, g);
  gap_csv.close();

  CsvWriter traj_csv(ws.out_dir() / "exp2_traj.csv", {"t", "policy", "Q", "S", "B", "P_exec"});
  auto emit = [&](const Rollout& r, const std::string& label, std::vector<double>& trace) {
    for (const auto& st : r.steps) {
      traj_csv.row(st.t, label, st.state.q, st.state.s, st.state.b, st.shielded.executed.p);
      trace.push_back(st.state.q);
    }
  };
  emit(vi_roll, "VI", out.vi_trace);
  emit(dp_roll, "DP-" + std::to_string(pl.h_trajectory), out.dp_trace);
  traj_csv.close();
  return out;
}

// ---- Exp 3: shield ablation in tabular Q-learning ----

inline void run_exp3(Workspace& ws) {
  const auto& shielded = ws.trained(true).log;
  const auto& unshielded = ws.trained(false).log;
  ensure_dir(ws.out_dir());
  CsvWriter csv(ws.out_dir() / "exp3_safety.csv",
                {"eval_episode", "arm", "mean_unsafe", "cumulative_crashes", "return"});
  auto emit = [&](const SafetyLog& log, const char* arm) {
    for (std::size_t i = 0; i < log.eval_episodes.size(); ++i) {
      const std::size_t ep = log.eval_episodes[i];
      csv.row(ep, std::string(arm), log.unsafe_steps_per_eval[i], log.cumulative_crashes[ep - 1],
              log.returns_per_eval[i]);
    }
  };
  emit(shielded, "shielded");
  emit(unshielded, "unshielded");
  csv.close();
}

// ---- Exp 4: burst demand shift ----

inline BurstTraces run_exp4(Workspace& ws) {
  const auto& cfg = ws.config();
  const auto& qs = ws.trained(true).q;
  const auto& qu = ws.trained(false).q;
  ws.note("exp4: burst evaluation");
  auto traces = burst_eval(qs, qu, ws.grid(), ws.population(), ws.params(), cfg.burst,
                           cfg.rl.unsafe_rule);
  ensure_dir(ws.out_dir());
  CsvWriter csv(ws.out_dir() / "exp4_burst.csv",
                {"t", "arm", "Q", "S", "P_exec", "P_safe_threshold", "w_scale"});
  auto emit = [&](const Rollout& r, const char* arm) {
    for (const auto& st : r.steps) {
      const ExtendedReal threshold =
          st.threshold_finite ? ExtendedReal(st.threshold) : ExtendedReal::infinity();
      csv.row(st.t, std::string(arm), st.state.q, st.state.s, st.shielded.executed.p, threshold,
              st.w_scale);
    }
  };
  emit(traces.shielded, "shielded");
  emit(traces.unshielded, "unshielded");
  csv.close();
  return traces;
}

inline const std::vector<std::string>& experiment_files() {
  static const std::vector<std::string> files{"exp1_gap.csv", "exp2_gap.csv", "exp2_traj.csv",
                                              "exp3_safety.csv", "exp4_burst.csv"};
  return files;
}

// Runs all four experiments in order, then writes the effective config and
// a manifest with the input hash, seed and per-file checksums.
inline void run_all(Workspace& ws) {
  ensure_dir(ws.out_dir());
  const std::string dumped = dump_config(ws.config());
  {
    std::ofstream cfg_out(ws.out_dir() / "config.json", std::ios::binary | std::ios::trunc);
    cfg_out << dumped;
    if (!cfg_out) throw ConfigError("cannot write config.json");
  }
  run_exp1(ws);
  run_exp2(ws);
  run_exp3(ws);
  run_exp4(ws);

  std::ofstream m(ws.out_dir() / "manifest.txt", std::ios::binary | std::ios::trunc);
  m << "input_hash " << hex64(Fnv1a().str(dumped).value()) << '\n';
  m << "instance_hash " << hex64(ws.hash()) << '\n';
  m << "seed " << ws.config().seed << '\n';
  for (const auto& f : experiment_files())
    m << f << ' ' << hex64(file_checksum(ws.out_dir() / f)) << '\n';
  if (!m) throw ConfigError("cannot write manifest.txt");
}

}  // namespace drainguard
