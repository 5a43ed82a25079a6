#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "drainguard/errors.hpp"
#include "drainguard/table.hpp"

namespace drainguard {

using Policy = std::vector<std::uint32_t>;

struct ValueFunction {
  std::vector<double> values;
  Policy policy;
};

struct ValueIterationResult {
  ValueFunction solution;
  int sweeps = 0;
  std::vector<double> residuals;  // sup-norm change per sweep
};

inline constexpr double kValueIterationTolerance = 1e-9;
inline constexpr int kValueIterationMaxSweeps = 5000;

namespace detail {

// One synchronous Bellman backup of `values` into `out`; also writes the
// greedy action (lowest index on ties) when `policy` is non-empty.
inline void bellman_backup(const GuardedTable& table, double gamma,
                           std::span<const double> values, std::span<double> out,
                           std::span<std::uint32_t> policy) {
  const std::size_t na = table.num_actions;
  for (std::size_t s = 0; s < table.num_states; ++s) {
    const std::size_t row = s * na;
    double best = table.reward[row] + gamma * values[table.next_index[row]];
    std::uint32_t arg = 0;
    for (std::size_t a = 1; a < na; ++a) {
      const double q = table.reward[row + a] + gamma * values[table.next_index[row + a]];
      if (q > best) {
        best = q;
        arg = static_cast<std::uint32_t>(a);
      }
    }
    out[s] = best;
    if (!policy.empty()) policy[s] = arg;
  }
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace detail

// Greedy policy with respect to `values`.
inline Policy greedy_policy(const GuardedTable& table, double gamma,
                            std::span<const double> values) {
  std::vector<double> scratch(table.num_states);
  Policy policy(table.num_states);
  detail::bellman_backup(table, gamma, values, scratch, policy);
  return policy;
}

inline double bellman_residual(const GuardedTable& table, double gamma,
                               std::span<const double> values) {
  std::vector<double> next(table.num_states);
  detail::bellman_backup(table, gamma, values, next, {});
  return detail::sup_distance(next, values);
}

inline ValueIterationResult value_iteration(const GuardedTable& table, double gamma,
                                            double tol = kValueIterationTolerance,
                                            int max_sweeps = kValueIterationMaxSweeps) {
  ValueIterationResult r;
  std::vector<double> v(table.num_states, 0.0);
  std::vector<double> next(table.num_states, 0.0);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    detail::bellman_backup(table, gamma, v, next, {});
    const double change = detail::sup_distance(next, v);
    v.swap(next);
    r.sweeps = sweep;
    r.residuals.push_back(change);
    if (change <= tol) {
      r.solution.policy = greedy_policy(table, gamma, v);
      r.solution.values = std::move(v);
      return r;
    }
  }
  throw NoConvergence("value iteration reached the sweep cap", r.residuals.back());
}

struct BackwardDpResult {
  std::vector<double> values;          // V_0^(H)
  Policy policy;                       // stage-0 greedy policy
  std::vector<Policy> stage_policies;  // stages 0..H-1, only when requested
};

// Exact backward recursion from V_H = 0.
inline BackwardDpResult backward_dp(const GuardedTable& table, double gamma, int horizon,
                                    bool keep_stage_policies = false) {
  if (horizon < 1) throw SpecError("backward_dp needs H >= 1");
  std::vector<double> v(table.num_states, 0.0);
  std::vector<double> prev(table.num_states, 0.0);
  BackwardDpResult r;
  if (keep_stage_policies) r.stage_policies.resize(static_cast<std::size_t>(horizon));
  Policy policy(table.num_states);
  for (int t = horizon - 1; t >= 0; --t) {
    prev.swap(v);
    detail::bellman_backup(table, gamma, prev, v, policy);
    if (keep_stage_policies) r.stage_policies[static_cast<std::size_t>(t)] = policy;
  }
  r.values = std::move(v);
  r.policy = std::move(policy);
  return r;
}

struct HorizonSweep {
  std::map<int, std::vector<double>> values;  // H -> V_0^(H)
  std::map<int, Policy> policies;             // H -> stage-0 policy of DP-H
};

// V_0^(H) for several horizons in a single pass, using V_0^(H) = T^H 0 and
// the fact that the stage-0 policy of DP-H is greedy in T^(H-1) 0.
inline HorizonSweep dp_horizon_sweep(const GuardedTable& table, double gamma,
                                     std::vector<int> horizons, bool keep_values = true) {
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
  HorizonSweep out;
  if (horizons.empty()) return out;
  if (horizons.front() < 1) throw SpecError("horizons must be >= 1");
  std::vector<double> v(table.num_states, 0.0);
  std::vector<double> next(table.num_states, 0.0);
  Policy policy(table.num_states);
  std::size_t want = 0;
  for (int h = 1; h <= horizons.back(); ++h) {
    detail::bellman_backup(table, gamma, v, next, policy);
    v.swap(next);
    if (h == horizons[want]) {
      if (keep_values) out.values[h] = v;
      out.policies[h] = policy;
      ++want;
    }
  }
  return out;
}

inline double max_abs_reward(const GuardedTable& table) {
  double r = 0.0;
  for (double x : table.reward) r = std::max(r, std::abs(x));
  return r;
}

inline double truncation_bound(const GuardedTable& table, double gamma, int horizon) {
  return std::pow(gamma, horizon) / (1.0 - gamma) * max_abs_reward(table);
}

inline constexpr double kGapFloor = 1e-12;

inline double gap_rel(double v_inf, double v_h) {
  return std::abs(v_inf - v_h) / std::max(std::abs(v_inf), kGapFloor);
}

}  // namespace drainguard
