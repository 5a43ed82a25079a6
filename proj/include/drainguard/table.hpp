#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "drainguard/dynamics.hpp"
#include "drainguard/grid.hpp"
#include "drainguard/guardrail.hpp"
#include "drainguard/model.hpp"

namespace drainguard {

// Deterministic on-grid transition and reward tables, row-major in
// (state index, action index).
struct GuardedTable {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<std::uint32_t> next_index;
  std::vector<double> reward;
  std::vector<ShieldMode> mode;  // shield outcome per pair; all unchanged when unshielded
  bool shielded = false;

  std::size_t at(std::size_t state, std::size_t action) const {
    return state * num_actions + action;
  }

  friend bool operator==(const GuardedTable&, const GuardedTable&) = default;
};

// Executed action for one grid pair, re-derived from the shield.
inline ShieldedAction table_executed_action(const GridSpec& grid, std::size_t state,
                                            std::size_t action, const Population& pop,
                                            const SystemParams& params, bool shielded) {
  const SystemState s = grid.state(state);
  const LeaderAction a = grid.action(action);
  if (shielded) return shield(s, a, pop, params);
  ShieldedAction out;
  out.executed = a;
  out.s_eff = effective_capacity(s, a.s_tar, params);
  out.p_safe = safe_price(pop, out.s_eff, params);
  return out;
}

inline GuardedTable build_table(const GridSpec& grid, const Population& pop,
                                const SystemParams& params, bool shielded) {
  GuardedTable t;
  t.num_states = grid.num_states();
  t.num_actions = grid.num_actions();
  t.shielded = shielded;
  const std::size_t n = t.num_states * t.num_actions;
  t.next_index.resize(n);
  t.reward.resize(n);
  t.mode.assign(n, ShieldMode::unchanged);
  for (std::size_t si = 0; si < t.num_states; ++si) {
    const SystemState s = grid.state(si);
    for (std::size_t ai = 0; ai < t.num_actions; ++ai) {
      const std::size_t k = t.at(si, ai);
      LeaderAction a = grid.action(ai);
      if (shielded) {
        const auto filtered = shield(s, a, pop, params);
        a = filtered.executed;
        t.mode[k] = filtered.mode;
      }
      const auto out = step(s, a, pop, params);
      t.next_index[k] = static_cast<std::uint32_t>(nearest_state_index(grid, out.next_state));
      t.reward[k] = out.reward;
    }
  }
  return t;
}

}  // namespace drainguard
