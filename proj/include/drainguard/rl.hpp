#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "drainguard/errors.hpp"
#include "drainguard/grid.hpp"
#include "drainguard/random.hpp"
#include "drainguard/rollout.hpp"
#include "drainguard/table.hpp"

namespace drainguard {

enum class StartMode {
  fixed,         // every episode starts at start_state
  uniform_grid,  // every episode starts at a uniformly drawn grid state
};

struct TrainConfig {
  std::size_t episodes = 8000;
  std::size_t episode_len = 200;
  double alpha = 0.15;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.8;
  std::size_t eval_every = 400;
  std::size_t eval_len = 250;
  std::uint64_t seed = 0;
  StartMode start_mode = StartMode::uniform_grid;
  SystemState start_state{0.0, 0.0, 0.0, 0.0};  // snapped to the grid
  SystemState eval_start{0.0, 2.0, 2.0, 1.0};
  UnsafeRule unsafe_rule = UnsafeRule::with_margin;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct ActionValueTable {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> q_values;

  ActionValueTable() = default;
  ActionValueTable(std::size_t ns, std::size_t na)
      : num_states(ns), num_actions(na), q_values(ns * na, 0.0) {}

  double& operator()(std::size_t s, std::size_t a) { return q_values[s * num_actions + a]; }
  double operator()(std::size_t s, std::size_t a) const { return q_values[s * num_actions + a]; }

  // Greedy action; ties go to the lowest index.
  std::uint32_t argmax(std::size_t s) const {
    const double* row = q_values.data() + s * num_actions;
    std::uint32_t best = 0;
    for (std::size_t a = 1; a < num_actions; ++a)
      if (row[a] > row[best]) best = static_cast<std::uint32_t>(a);
    return best;
  }

  double max(std::size_t s) const { return (*this)(s, argmax(s)); }

  friend bool operator==(const ActionValueTable&, const ActionValueTable&) = default;
};

struct SafetyLog {
  std::vector<std::size_t> eval_episodes;          // training episodes completed at each evaluation
  std::vector<double> unsafe_steps_per_eval;
  std::vector<double> returns_per_eval;
  std::vector<std::size_t> emergency_steps_per_eval;
  std::vector<bool> eval_crashed;
  std::vector<std::size_t> cumulative_crashes;     // one entry per training episode

  friend bool operator==(const SafetyLog&, const SafetyLog&) = default;
};

struct TrainResult {
  ActionValueTable q;
  SafetyLog log;
};

struct EvalResult {
  double discounted_return = 0.0;
  std::size_t unsafe = 0;
  std::size_t emergency = 0;
  bool crashed = false;
  Rollout rollout;
};

// Linear decay over the first eps_decay_fraction of training, flat after.
inline double epsilon_at(const TrainConfig& cfg, std::size_t episode) {
  const double window = cfg.eps_decay_fraction * static_cast<double>(cfg.episodes);
  const double e = static_cast<double>(episode);
  if (window <= 0.0 || e >= window) return cfg.eps_end;
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * (e / window);
}

inline PolicyLookup greedy_lookup(const ActionValueTable& q) {
  return [&q](std::size_t, std::size_t s) { return q.argmax(s); };
}

inline EvalResult greedy_eval(const ActionValueTable& q, const GridSpec& grid,
                              const Population& pop, const SystemParams& params,
                              const SystemState& s0, std::size_t length, bool shielded,
                              const DemandSchedule& schedule = DemandSchedule::steady(),
                              UnsafeRule rule = UnsafeRule::with_margin,
                              bool stop_on_crash = true) {
  RolloutOptions opts;
  opts.shielded = shielded;
  opts.stop_on_crash = stop_on_crash;
  opts.unsafe_rule = rule;
  EvalResult r;
  r.rollout = offgrid_rollout(grid, greedy_lookup(q), s0, pop, params, length, schedule, opts);
  r.discounted_return = r.rollout.discounted_return;
  r.unsafe = r.rollout.unsafe_count;
  r.emergency = r.rollout.emergency_count;
  r.crashed = r.rollout.crashed;
  return r;
}

// One-step Q-learning on the prebuilt table. Exploration draws uniformly over
// the whole action grid; the table already encodes whether the shield acts.
// Episodes start at a uniformly drawn grid state unless start_mode is fixed,
// and both draws come from the seeded exploration stream.
// An episode ends when its next state sits on the q_max boundary; that
// transition still bootstraps from the boundary state, since the table keeps
// evolving from it.
inline TrainResult train(const GuardedTable& table, const GridSpec& grid, const Population& pop,
                         const SystemParams& params, const TrainConfig& cfg) {
  if (table.num_states != grid.num_states() || table.num_actions != grid.num_actions())
    throw SpecError("table does not match the grid");
  if (cfg.eval_every == 0) throw SpecError("eval_every must be >= 1");
  TrainResult out;
  out.q = ActionValueTable(table.num_states, table.num_actions);
  auto& q = out.q;
  RandomStream rng(cfg.seed, StreamId::exploration);
  const std::size_t start = nearest_state_index(grid, cfg.start_state);
  const std::size_t boundary_q = grid.q_points().size() - 1;
  std::size_t crashes = 0;
  out.log.cumulative_crashes.reserve(cfg.episodes);

  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    const double eps = epsilon_at(cfg, ep);
    std::size_t s = cfg.start_mode == StartMode::fixed ? start : rng.index(table.num_states);
    for (std::size_t t = 0; t < cfg.episode_len; ++t) {
      const std::size_t a = rng.uniform01() < eps ? rng.index(table.num_actions) : q.argmax(s);
      const std::size_t k = table.at(s, a);
      const std::size_t next = table.next_index[k];
      const double target = table.reward[k] + params.gamma * q.max(next);
      q(s, a) += cfg.alpha * (target - q(s, a));
      s = next;
      if (grid.q_index_of_state(next) == boundary_q) {
        ++crashes;
        break;
      }
    }
    out.log.cumulative_crashes.push_back(crashes);

    if ((ep + 1) % cfg.eval_every == 0) {
      const auto ev = greedy_eval(q, grid, pop, params, cfg.eval_start, cfg.eval_len,
                                  table.shielded, DemandSchedule::steady(), cfg.unsafe_rule);
      out.log.eval_episodes.push_back(ep + 1);
      out.log.unsafe_steps_per_eval.push_back(static_cast<double>(ev.unsafe));
      out.log.returns_per_eval.push_back(ev.discounted_return);
      out.log.emergency_steps_per_eval.push_back(ev.emergency);
      out.log.eval_crashed.push_back(ev.crashed);
    }
  }
  return out;
}

struct BurstConfig {
  std::size_t start = 40;
  std::size_t end = 70;
  double factor = 3.0;
  SystemState s0{0.0, 2.0, 2.0, 1.0};
  std::size_t length = 150;

  friend bool operator==(const BurstConfig&, const BurstConfig&) = default;
};

struct BurstTraces {
  Rollout shielded;
  Rollout unshielded;
};

// Both greedy policies under the same burst; the shield (shielded arm only)
// recomputes the residual floor with the scaled weights. Runs the full
// length even past a crash so traces stay aligned.
inline BurstTraces burst_eval(const ActionValueTable& q_shielded,
                              const ActionValueTable& q_unshielded, const GridSpec& grid,
                              const Population& pop, const SystemParams& params,
                              const BurstConfig& cfg = {},
                              UnsafeRule rule = UnsafeRule::with_margin) {
  const auto schedule = DemandSchedule::burst(cfg.start, cfg.end, cfg.factor);
  BurstTraces out;
  out.shielded = greedy_eval(q_shielded, grid, pop, params, cfg.s0, cfg.length, true, schedule,
                             rule, false)
                     .rollout;
  out.unshielded = greedy_eval(q_unshielded, grid, pop, params, cfg.s0, cfg.length, false,
                               schedule, rule, false)
                       .rollout;
  return out;
}

}  // namespace drainguard
