#pragma once

#include <algorithm>

#include "drainguard/demand.hpp"
#include "drainguard/model.hpp"

namespace drainguard {

struct RewardTerms {
  double revenue = 0.0;         // p * Lambda*
  double op_cost = 0.0;         // c_op * S
  double pipeline_cost = 0.0;   // c_b * B
  double target_penalty = 0.0;  // eta_tar * (S_tar - S_tar_prev)^2
  double slo_penalty = 0.0;     // phi0 * Xi

  double total() const {
    return revenue - op_cost - pipeline_cost - target_penalty - slo_penalty;
  }
};

struct StepOutcome {
  SystemState next_state;
  double reward = 0.0;
  DemandProfile demand;
  double activated = 0.0;  // A_t
  double canceled = 0.0;   // C_t
  double delay = 0.0;      // D_t
  double xi = 0.0;
  bool crashed = false;             // pre-clamp backlog reached q_max
  bool pipeline_truncated = false;  // B' projection bound from above
};

inline double project(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

inline RewardTerms reward_components(const SystemState& state, const LeaderAction& action,
                                     const Population& pop, const SystemParams& params) {
  const double d = delay_proxy(state.q, state.s, params);
  const double dt = action.s_tar - state.s_tar_prev;
  RewardTerms r;
  r.revenue = action.p * total_demand(pop, action.p, d);
  r.op_cost = params.c_op * state.s;
  r.pipeline_cost = params.c_b * state.b;
  r.target_penalty = params.eta_tar * dt * dt;
  r.slo_penalty = params.phi0 * slo_risk(pop, action.p, d);
  return r;
}

// One closed-loop epoch: follower equilibrium, queue update, then the
// provisioning pipeline. Activation is taken before cancellation.
inline StepOutcome step(const SystemState& state, const LeaderAction& action,
                        const Population& pop, const SystemParams& params) {
  StepOutcome out;
  out.delay = delay_proxy(state.q, state.s, params);
  out.demand = aggregate_demand(pop, action.p, out.delay);
  out.xi = slo_risk(pop, action.p, out.delay);

  const double up = positive_part(action.s_tar - state.s_tar_prev);
  const double down = positive_part(state.s_tar_prev - action.s_tar);
  out.activated = std::min(params.omega * state.b, params.s_max - state.s);
  const double pending = state.b - out.activated + up;
  out.canceled = std::min(params.chi * down, pending);

  const double b_next = pending - out.canceled;
  out.pipeline_truncated = b_next > params.b_max;
  const double q_next =
      positive_part(state.q + params.delta * (out.demand.total - state.s * params.mu));
  out.crashed = q_next >= params.q_max;

  out.next_state.q = std::min(q_next, params.q_max);
  out.next_state.s = project(
      state.s + out.activated - params.nu * positive_part(state.s - action.s_tar), 0.0,
      params.s_max);
  out.next_state.b = project(b_next, 0.0, params.b_max);
  out.next_state.s_tar_prev = action.s_tar;

  out.reward = reward_components(state, action, pop, params).total();
  return out;
}

// Backlog recursion with (p, s) held fixed. Unlike step(), the backlog is
// not truncated at q_max.
inline double fixed_pair_step(double q, double p, double s, const Population& pop,
                              const SystemParams& params) {
  const double demand = total_demand(pop, p, delay_proxy(q, s, params));
  return positive_part(q + params.delta * (demand - s * params.mu));
}

}  // namespace drainguard
