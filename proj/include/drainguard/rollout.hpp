#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "drainguard/dynamics.hpp"
#include "drainguard/grid.hpp"
#include "drainguard/guardrail.hpp"
#include "drainguard/random.hpp"
#include "drainguard/solve.hpp"

namespace drainguard {

// Utility weights are multiplied by `factor` for epochs in [start, end).
struct DemandSchedule {
  std::size_t start = 0;
  std::size_t end = 0;
  double factor = 1.0;

  static DemandSchedule steady() { return {}; }
  static DemandSchedule burst(std::size_t start, std::size_t end, double factor) {
    return {start, end, factor};
  }

  double scale_at(std::size_t t) const { return (t >= start && t < end) ? factor : 1.0; }
};

// Maps (epoch, nearest grid state index) to an action index.
using PolicyLookup = std::function<std::uint32_t(std::size_t, std::size_t)>;

inline PolicyLookup stationary_policy(const Policy& policy) {
  return [&policy](std::size_t, std::size_t s) { return policy[s]; };
}

// Stage-t policy for t < H, then the stage-0 policy.
inline PolicyLookup nonstationary_policy(const std::vector<Policy>& stages) {
  return [&stages](std::size_t t, std::size_t s) {
    return t < stages.size() ? stages[t][s] : stages.front()[s];
  };
}

struct RolloutOptions {
  bool shielded = true;
  bool project_each_step = false;  // snap every state to the grid (on-grid replay)
  bool stop_on_crash = false;
  UnsafeRule unsafe_rule = UnsafeRule::with_margin;
};

struct RolloutStep {
  std::size_t t = 0;
  SystemState state;
  LeaderAction proposal;
  ShieldedAction shielded;  // executed action and shield metadata
  double threshold = 0.0;   // safe price at the executed target (infinite when none)
  bool threshold_finite = false;
  double reward = 0.0;
  double w_scale = 1.0;
  bool unsafe = false;
  bool crashed = false;
};

struct Rollout {
  std::vector<RolloutStep> steps;
  SystemState final_state;
  double discounted_return = 0.0;
  std::size_t unsafe_count = 0;
  std::size_t emergency_count = 0;
  bool crashed = false;
};

// Executes a grid policy on the continuous dynamics: look up the action at
// the nearest grid state, optionally shield it, and step without projecting
// the state back onto the grid.
inline Rollout offgrid_rollout(const GridSpec& grid, const PolicyLookup& policy,
                               const SystemState& s0, const Population& pop,
                               const SystemParams& params, std::size_t t_eval,
                               const DemandSchedule& schedule = DemandSchedule::steady(),
                               const RolloutOptions& opts = {}) {
  Rollout out;
  out.steps.reserve(t_eval);
  SystemState state = opts.project_each_step ? grid.state(nearest_state_index(grid, s0)) : s0;
  double discount = 1.0;
  for (std::size_t t = 0; t < t_eval; ++t) {
    const double scale = schedule.scale_at(t);
    const Population pop_t = scale == 1.0 ? pop : pop.scaled(scale);

    RolloutStep rec;
    rec.t = t;
    rec.state = state;
    rec.w_scale = scale;
    rec.proposal = grid.action(policy(t, nearest_state_index(grid, state)));
    if (opts.shielded) {
      rec.shielded = shield(state, rec.proposal, pop_t, params);
    } else {
      rec.shielded.executed = rec.proposal;
      rec.shielded.s_eff = effective_capacity(state, rec.proposal.s_tar, params);
      rec.shielded.p_safe = safe_price(pop_t, rec.shielded.s_eff, params);
    }
    const LeaderAction& exec = rec.shielded.executed;
    const ExtendedReal threshold =
        safe_price(pop_t, effective_capacity(state, exec.s_tar, params), params);
    rec.threshold_finite = threshold.finite();
    rec.threshold = threshold.finite() ? threshold.value() : 0.0;
    rec.unsafe = unsafe_step(state, exec, pop_t, params, opts.unsafe_rule);

    const auto outcome = step(state, exec, pop_t, params);
    rec.reward = outcome.reward;
    rec.crashed = outcome.crashed;
    out.discounted_return += discount * outcome.reward;
    discount *= params.gamma;
    out.unsafe_count += rec.unsafe ? 1 : 0;
    out.emergency_count += rec.shielded.mode == ShieldMode::emergency ? 1 : 0;
    out.crashed = out.crashed || outcome.crashed;
    out.steps.push_back(rec);

    state = opts.project_each_step ? grid.state(nearest_state_index(grid, outcome.next_state))
                                   : outcome.next_state;
    if (outcome.crashed && opts.stop_on_crash) break;
  }
  out.final_state = state;
  return out;
}

// Initial states with the backlog drawn uniformly from center.q +- half_width
// (clipped to [0, q_max]) and the other coordinates held at `center`.
inline std::vector<SystemState> perturbed_starts(const SystemState& center, double half_width,
                                                 std::size_t n_samp, const SystemParams& params,
                                                 std::uint64_t seed) {
  RandomStream rng(seed, StreamId::perturbation);
  std::vector<SystemState> out;
  out.reserve(n_samp);
  for (std::size_t i = 0; i < n_samp; ++i) {
    SystemState s = center;
    s.q = std::clamp(center.q + rng.uniform(-half_width, half_width), 0.0, params.q_max);
    out.push_back(s);
  }
  return out;
}

// Mean relative gap between the off-grid returns of two policies over the
// same initial states.
inline double gap_off(const GridSpec& grid, const PolicyLookup& vi_policy,
                      const PolicyLookup& dp_policy, const std::vector<SystemState>& starts,
                      const Population& pop, const SystemParams& params, std::size_t t_eval,
                      const RolloutOptions& opts = {}) {
  if (starts.empty()) throw SpecError("gap_off needs at least one initial state");
  double total = 0.0;
  for (const auto& s0 : starts) {
    const double j_vi =
        offgrid_rollout(grid, vi_policy, s0, pop, params, t_eval, {}, opts).discounted_return;
    const double j_dp =
        offgrid_rollout(grid, dp_policy, s0, pop, params, t_eval, {}, opts).discounted_return;
    total += gap_rel(j_vi, j_dp);
  }
  return total / static_cast<double>(starts.size());
}

}  // namespace drainguard
