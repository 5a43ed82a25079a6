#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "drainguard/errors.hpp"
#include "drainguard/extended_real.hpp"

namespace drainguard {

// Physical and economic constants of one instance. Construct freely, then
// pass through validate_params() before handing to the rest of the library.
struct SystemParams {
  double delta = 1.0;       // epoch length
  double gamma = 0.99;      // discount factor
  double mu = 0.8;          // service rate per GPU per epoch
  double eps_delay = 0.1;   // delay-proxy baseline
  double q_max = 50.0;
  double s_max = 4.0;
  double b_max = 3.0;
  double p_min = 1.0;
  double p_max = 6.0;
  double omega = 0.2;       // pipeline activation rate
  double nu = 0.2;          // scale-down inertia
  double chi = 0.3;         // cancellation fraction
  double c_op = 1.0;
  double c_b = 0.5;
  double eta_tar = 0.4;
  double phi0 = 8.0;
  double zeta = 0.05;       // shield safety margin

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct TenantType {
  double w = 1.0;
  ExtendedReal slo = ExtendedReal::infinity();
  double delta_k = 0.0;
  double rho = 1.0;

  bool delay_sensitive() const { return delta_k > 0.0; }

  friend bool operator==(const TenantType&, const TenantType&) = default;
};

// Mean-field population; only validate_population() produces one.
class Population {
 public:
  const std::vector<TenantType>& types() const { return types_; }
  std::size_t size() const { return types_.size(); }
  const TenantType& operator[](std::size_t k) const { return types_[k]; }

  // Same population with every utility weight multiplied by `factor`.
  Population scaled(double factor) const {
    Population out = *this;
    for (auto& t : out.types_) t.w *= factor;
    return out;
  }

  friend bool operator==(const Population&, const Population&) = default;

 private:
  friend Population validate_population(std::vector<TenantType>);
  explicit Population(std::vector<TenantType> types) : types_(std::move(types)) {}

  std::vector<TenantType> types_;
};

struct SystemState {
  double q = 0.0;           // backlog
  double s = 0.0;           // active capacity
  double b = 0.0;           // pending pipeline
  double s_tar_prev = 0.0;  // previous capacity target

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

struct LeaderAction {
  double p = 1.0;      // unit price
  double s_tar = 0.0;  // capacity target

  friend bool operator==(const LeaderAction&, const LeaderAction&) = default;
};

inline constexpr double kDensityTolerance = 1e-9;

inline SystemParams validate_params(const SystemParams& raw) {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw RangeError(field, rule);
  };
  auto finite = [](double x) { return std::isfinite(x); };
  const auto& r = raw;
  require(finite(r.delta) && r.delta > 0.0, "delta", "must be > 0");
  require(finite(r.gamma) && r.gamma > 0.0 && r.gamma < 1.0, "gamma", "must lie in (0,1)");
  require(finite(r.mu) && r.mu > 0.0, "mu", "must be > 0");
  require(finite(r.eps_delay) && r.eps_delay > 0.0, "eps_delay", "must be > 0");
  require(finite(r.q_max) && r.q_max > 0.0, "q_max", "must be > 0");
  require(finite(r.s_max) && r.s_max > 0.0, "s_max", "must be > 0");
  require(finite(r.b_max) && r.b_max > 0.0, "b_max", "must be > 0");
  require(finite(r.p_min) && r.p_min > 0.0, "p_min", "must be > 0");
  require(finite(r.p_max) && r.p_max >= r.p_min, "p_max", "must be >= p_min");
  require(finite(r.omega) && r.omega > 0.0 && r.omega <= 1.0, "omega", "must lie in (0,1]");
  require(finite(r.nu) && r.nu > 0.0 && r.nu <= 1.0, "nu", "must lie in (0,1]");
  require(finite(r.chi) && r.chi >= 0.0 && r.chi <= 1.0, "chi", "must lie in [0,1]");
  require(finite(r.c_op) && r.c_op >= 0.0, "c_op", "must be >= 0");
  require(finite(r.c_b) && r.c_b >= 0.0, "c_b", "must be >= 0");
  require(finite(r.eta_tar) && r.eta_tar >= 0.0, "eta_tar", "must be >= 0");
  require(finite(r.phi0) && r.phi0 >= 0.0, "phi0", "must be >= 0");
  require(finite(r.zeta) && r.zeta > 0.0 && r.zeta < 1.0, "zeta", "must lie in (0,1)");
  return raw;
}

inline Population validate_population(std::vector<TenantType> types) {
  if (types.empty()) throw DensityError("population has no tenant types");
  double total = 0.0;
  for (std::size_t k = 0; k < types.size(); ++k) {
    const auto& t = types[k];
    const std::string tag = "type " + std::to_string(k + 1);
    if (!(std::isfinite(t.w) && t.w > 0.0)) throw RangeError("w", tag + ": must be > 0");
    if (!(std::isfinite(t.rho) && t.rho >= 0.0)) throw RangeError("rho", tag + ": must be >= 0");
    if (!(std::isfinite(t.delta_k) && t.delta_k >= 0.0))
      throw RangeError("delta_k", tag + ": must be >= 0");
    if (t.slo.finite() && !(std::isfinite(t.slo.value()) && t.slo.value() > 0.0))
      throw RangeError("slo", tag + ": must be > 0 or infinite");
    if ((t.delta_k == 0.0) != t.slo.infinite())
      throw ConsistencyError(tag + ": delta_k = 0 exactly when slo is infinite");
    total += t.rho;
  }
  if (std::abs(total - 1.0) > kDensityTolerance)
    throw DensityError("densities sum to " + std::to_string(total) + ", expected 1");
  return Population(std::move(types));
}

// Projects each coordinate onto its closed interval.
inline SystemState clamp_state(const std::array<double, 4>& raw, const SystemParams& params) {
  return SystemState{std::clamp(raw[0], 0.0, params.q_max), std::clamp(raw[1], 0.0, params.s_max),
                     std::clamp(raw[2], 0.0, params.b_max),
                     std::clamp(raw[3], 0.0, params.s_max)};
}

inline SystemState clamp_state(const SystemState& s, const SystemParams& params) {
  return clamp_state(std::array<double, 4>{s.q, s.s, s.b, s.s_tar_prev}, params);
}

inline LeaderAction clamp_action(const LeaderAction& a, const SystemParams& params) {
  return LeaderAction{std::clamp(a.p, params.p_min, params.p_max),
                      std::clamp(a.s_tar, 0.0, params.s_max)};
}

inline bool in_bounds(const SystemState& s, const SystemParams& params) {
  return s.q >= 0.0 && s.q <= params.q_max && s.s >= 0.0 && s.s <= params.s_max &&
         s.b >= 0.0 && s.b <= params.b_max && s.s_tar_prev >= 0.0 &&
         s.s_tar_prev <= params.s_max;
}

// The reference instance: default-constructed SystemParams plus the
// six-type mix below.
inline SystemParams baseline_params() { return validate_params(SystemParams{}); }

inline std::vector<TenantType> baseline_tenant_types() {
  const auto inf = ExtendedReal::infinity();
  return {
      {24.0, 4.0, 4.5, 0.10}, {18.0, 6.0, 2.5, 0.15}, {16.0, 10.0, 1.5, 0.15},
      {15.0, 15.0, 1.1, 0.10}, {12.0, inf, 0.0, 0.30}, {10.0, inf, 0.0, 0.20},
  };
}

inline Population baseline_population() { return validate_population(baseline_tenant_types()); }

}  // namespace drainguard
