#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "drainguard/demand.hpp"
#include "drainguard/dynamics.hpp"
#include "drainguard/extended_real.hpp"
#include "drainguard/model.hpp"

namespace drainguard {

enum class ShieldMode { unchanged, price_lifted, emergency };

inline const char* to_string(ShieldMode m) {
  switch (m) {
    case ShieldMode::unchanged: return "unchanged";
    case ShieldMode::price_lifted: return "price_lifted";
    case ShieldMode::emergency: return "emergency";
  }
  return "?";
}

struct ShieldedAction {
  LeaderAction executed;
  ShieldMode mode = ShieldMode::unchanged;
  ExtendedReal p_safe = ExtendedReal::infinity();
  double s_eff = 0.0;
};

struct OperatingPoint {
  double q_star = 0.0;
  bool at_zero = false;
  int iterations = 0;
  double residual = 0.0;
};

inline constexpr double kBisectionTolerance = 1e-10;
inline constexpr int kBisectionMaxIterations = 200;

inline DrainabilityReport certify(const Population& pop, double p, double s,
                                  const SystemParams& params) {
  DrainabilityReport r;
  r.residual_floor = residual_floor(pop, p);
  r.service_rate = s * params.mu;
  r.slack = r.service_rate - r.residual_floor;
  r.drainable = r.slack > 0.0;
  auto drops = drop_thresholds(pop, p, s, params);
  r.q_drop = drops.max;
  r.q_drop_per_type = std::move(drops.per_type);
  r.demand_cap = demand_cap(pop, p);
  const auto lip = lipschitz_certificate(pop, p, s, params);
  r.lipschitz_bound = lip.bound;
  r.step_ok = lip.step_ok;
  return r;
}

// Service level the residual floor must not exceed under the safety margin.
inline double margin_service(double s, const SystemParams& params) {
  return (1.0 - params.zeta) * s * params.mu;
}

// Smallest price in [p_min, p_max] whose residual floor fits under the
// margin service level, or infinity when none does.
//
// On each interval between consecutive residual weights the active set is
// fixed and the floor is W/p - R, so the crossing solves in closed form.
// The returned price is nudged up by ulps until the floor evaluates to at
// most the target, so the certificate also holds in floating point.
inline ExtendedReal safe_price(const Population& pop, double s, const SystemParams& params) {
  const double target = margin_service(s, params);
  if (residual_floor(pop, params.p_min) <= target) return params.p_min;

  std::vector<const TenantType*> residual;
  for (const auto& t : pop.types())
    if (!t.delay_sensitive() && t.rho > 0.0) residual.push_back(&t);
  std::sort(residual.begin(), residual.end(),
            [](const TenantType* a, const TenantType* b) { return a->w < b->w; });

  double crossing = -1.0;
  double lo = params.p_min;
  for (std::size_t j = 0; j < residual.size(); ++j) {
    const double hi = residual[j]->w;
    if (hi <= lo) continue;
    const double floor_hi = residual_floor(pop, hi);
    if (floor_hi > target) {
      lo = hi;
      continue;
    }
    if (floor_hi == target) {
      crossing = hi;
      break;
    }
    // Types j.. are active on (lo, hi).
    double weight = 0.0;
    double mass = 0.0;
    for (std::size_t k = j; k < residual.size(); ++k) {
      weight += residual[k]->rho * residual[k]->w;
      mass += residual[k]->rho;
    }
    crossing = std::clamp(weight / (target + mass), lo, hi);
    break;
  }
  // Only reachable with a non-positive target; the floor vanishes past the
  // largest residual weight.
  if (crossing < 0.0) crossing = lo;

  while (residual_floor(pop, crossing) > target)
    crossing = std::nextafter(crossing, std::numeric_limits<double>::infinity());
  if (crossing > params.p_max) return ExtendedReal::infinity();
  return crossing;
}

// Active capacity one epoch ahead under the candidate target.
inline double effective_capacity(const SystemState& state, double s_tar,
                                 const SystemParams& params) {
  const double activation = std::min(params.omega * state.b, params.s_max - state.s);
  return project(state.s + activation - params.nu * positive_part(state.s - s_tar), 0.0,
                 params.s_max);
}

// Raises the price to the safe level at the proposal's effective capacity,
// or substitutes (p_max, s_max) when no admissible price is safe.
inline ShieldedAction shield(const SystemState& state, const LeaderAction& proposal,
                             const Population& pop, const SystemParams& params) {
  ShieldedAction out;
  out.s_eff = effective_capacity(state, proposal.s_tar, params);
  out.p_safe = safe_price(pop, out.s_eff, params);
  if (out.p_safe.infinite()) {
    out.executed = LeaderAction{params.p_max, params.s_max};
    out.mode = ShieldMode::emergency;
    return out;
  }
  if (proposal.p >= out.p_safe.value()) {
    out.executed = proposal;
    out.mode = ShieldMode::unchanged;
  } else {
    out.executed = LeaderAction{out.p_safe.value(), proposal.s_tar};
    out.mode = ShieldMode::price_lifted;
  }
  return out;
}

enum class UnsafeRule {
  with_margin,  // floor > (1 - zeta) S_eff mu
  margin_free,  // floor >= S_eff mu, i.e. the strict guardrail fails
};

// Whether an executed action violates the guardrail at the state it runs in.
inline bool unsafe_step(const SystemState& state, const LeaderAction& executed,
                        const Population& pop, const SystemParams& params,
                        UnsafeRule rule = UnsafeRule::with_margin) {
  const double s_eff = effective_capacity(state, executed.s_tar, params);
  const double floor = residual_floor(pop, executed.p);
  if (rule == UnsafeRule::with_margin) return floor > margin_service(s_eff, params);
  return floor >= s_eff * params.mu;
}

inline OperatingPoint operating_point(const Population& pop, double p, double s,
                                      const SystemParams& params,
                                      double tol = kBisectionTolerance) {
  const double service = s * params.mu;
  if (!(residual_floor(pop, p) < service))
    throw NotDrainable("pair (p=" + std::to_string(p) + ", s=" + std::to_string(s) +
                       ") violates the drainability guardrail");
  auto excess = [&](double q) {
    return total_demand(pop, p, delay_proxy(q, s, params)) - service;
  };
  OperatingPoint out;
  const double f0 = excess(0.0);
  if (f0 <= 0.0) {
    out.at_zero = true;
    return out;
  }
  double lo = 0.0;
  double hi = drop_thresholds(pop, p, s, params).max;
  for (int it = 1; it <= kBisectionMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = excess(mid);
    out.iterations = it;
    out.q_star = mid;
    out.residual = std::abs(f);
    if (out.residual <= tol) return out;
    (f > 0.0 ? lo : hi) = mid;
  }
  throw NoConvergence("operating-point bisection hit the iteration cap", out.residual);
}

// Upper end of the forward-invariant backlog interval [0, q_drop + delta Lambda_max].
inline double absorbing_interval(const Population& pop, double p, double s,
                                 const SystemParams& params) {
  return drop_thresholds(pop, p, s, params).max + params.delta * demand_cap(pop, p);
}

// Backlog sequence q_0..q_{t_max} of the fixed-pair recursion.
inline std::vector<double> simulate_fixed_pair(double q0, const Population& pop, double p,
                                               double s, const SystemParams& params,
                                               std::size_t t_max) {
  std::vector<double> traj;
  traj.reserve(t_max + 1);
  traj.push_back(q0);
  for (std::size_t t = 0; t < t_max; ++t)
    traj.push_back(fixed_pair_step(traj.back(), p, s, pop, params));
  return traj;
}

}  // namespace drainguard
