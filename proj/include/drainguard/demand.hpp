#pragma once

#include <algorithm>
#include <vector>

#include "drainguard/model.hpp"

// Stage-wise follower equilibrium. Every tenant type maximizes
// w log(1 + lambda) - (p + delta_k d) lambda, whose maximizer is
// [w / (p + delta_k d) - 1]_+.

namespace drainguard {

struct DemandProfile {
  std::vector<double> per_type;  // lambda_k*
  double total = 0.0;            // sum_k rho_k lambda_k*
};

struct DrainabilityReport {
  double residual_floor = 0.0;
  double service_rate = 0.0;
  double slack = 0.0;
  bool drainable = false;
  double q_drop = 0.0;
  std::vector<double> q_drop_per_type;  // one entry per delay-sensitive type, in order
  double demand_cap = 0.0;
  double lipschitz_bound = 0.0;
  bool step_ok = false;
};

struct DropThresholds {
  std::vector<double> per_type;  // delay-sensitive types only, population order
  double max = 0.0;              // 0 when no type is delay-sensitive
};

struct LipschitzCertificate {
  double bound = 0.0;
  bool step_ok = true;  // delta * bound <= 1
};

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline double delay_proxy(double q, double s, const SystemParams& params) {
  return q / (s * params.mu + params.eps_delay);
}

inline double best_response(const TenantType& type, double p, double d) {
  const double unit_cost = type.delay_sensitive() ? p + type.delta_k * d : p;
  return positive_part(type.w / unit_cost - 1.0);
}

inline DemandProfile aggregate_demand(const Population& pop, double p, double d) {
  DemandProfile out;
  out.per_type.reserve(pop.size());
  for (const auto& t : pop.types()) {
    const double rate = best_response(t, p, d);
    out.per_type.push_back(rate);
    out.total += t.rho * rate;
  }
  return out;
}

// Allocation-free version of aggregate_demand(...).total.
inline double total_demand(const Population& pop, double p, double d) {
  double total = 0.0;
  for (const auto& t : pop.types()) total += t.rho * best_response(t, p, d);
  return total;
}

// Demand of the delay-insensitive types; it does not vanish under congestion.
inline double residual_floor(const Population& pop, double p) {
  double total = 0.0;
  for (const auto& t : pop.types())
    if (!t.delay_sensitive()) total += t.rho * positive_part(t.w / p - 1.0);
  return total;
}

inline DropThresholds drop_thresholds(const Population& pop, double p, double s,
                                      const SystemParams& params) {
  DropThresholds out;
  const double scale = s * params.mu + params.eps_delay;
  for (const auto& t : pop.types()) {
    if (!t.delay_sensitive()) continue;
    const double q = positive_part(scale * (t.w - p) / t.delta_k);
    out.per_type.push_back(q);
    out.max = std::max(out.max, q);
  }
  return out;
}

// Demand at zero delay; an upper bound on demand at any backlog.
inline double demand_cap(const Population& pop, double p) { return total_demand(pop, p, 0.0); }

// Excess-delay mass beyond each type's SLO. Infinite-SLO types are skipped.
inline double slo_risk(const Population& pop, double p, double d) {
  double total = 0.0;
  for (const auto& t : pop.types()) {
    if (t.slo.infinite()) continue;
    const double excess = positive_part(d - t.slo.value());
    if (excess == 0.0) continue;
    total += t.rho * best_response(t, p, d) * excess;
  }
  return total;
}

// Sufficient bound on the backlog-Lipschitz constant of the demand map for a
// fixed (p, s), and whether it certifies delta * L <= 1. A failed check only
// means the sufficient condition is inconclusive.
inline LipschitzCertificate lipschitz_certificate(const Population& pop, double p, double s,
                                                  const SystemParams& params) {
  double weighted = 0.0;
  for (const auto& t : pop.types())
    if (t.delay_sensitive()) weighted += t.rho * t.w * t.delta_k;
  LipschitzCertificate out;
  out.bound = weighted / ((s * params.mu + params.eps_delay) * p * p);
  out.step_ok = params.delta * out.bound <= 1.0;
  return out;
}

}  // namespace drainguard
