#include <catch_amalgamated.hpp>

#include <random>

#include "drainguard/dynamics.hpp"
#include "drainguard/guardrail.hpp"

using namespace drainguard;
using Catch::Matchers::WithinAbs;

namespace {
const auto kParams = baseline_params();
const auto kPop = baseline_population();

SystemState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(rng) * kParams.q_max, u(rng) * kParams.s_max, u(rng) * kParams.b_max,
          u(rng) * kParams.s_max};
}

LeaderAction random_action(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {kParams.p_min + u(rng) * (kParams.p_max - kParams.p_min), u(rng) * kParams.s_max};
}
}  // namespace

TEST_CASE("worked step example", "[dynamics]") {
  const auto out = step({0.0, 2.0, 1.0, 2.0}, {4.0, 2.0}, kPop, kParams);
  CHECK_THAT(out.demand.total, WithinAbs(2.65, 1e-14));
  CHECK(out.delay == 0.0);
  CHECK(out.xi == 0.0);
  CHECK_THAT(out.activated, WithinAbs(0.2, 1e-15));
  CHECK(out.canceled == 0.0);
  CHECK_THAT(out.next_state.b, WithinAbs(0.8, 1e-15));
  CHECK_THAT(out.next_state.s, WithinAbs(2.2, 1e-15));
  CHECK_THAT(out.next_state.q, WithinAbs(1.05, 1e-14));
  CHECK(out.next_state.s_tar_prev == 2.0);
  CHECK_THAT(out.reward, WithinAbs(8.1, 1e-13));
  CHECK_FALSE(out.crashed);

  const auto r = reward_components({0.0, 2.0, 1.0, 2.0}, {4.0, 2.0}, kPop, kParams);
  CHECK_THAT(r.revenue, WithinAbs(10.6, 1e-13));
  CHECK(r.op_cost == 2.0);
  CHECK(r.pipeline_cost == 0.5);
  CHECK(r.target_penalty == 0.0);
  CHECK(r.slo_penalty == 0.0);
}

TEST_CASE("pipeline terms", "[dynamics]") {
  const auto out = step({10.0, 2.0, 2.0, 2.0}, {4.0, 1.0}, kPop, kParams);
  CHECK_THAT(out.activated, WithinAbs(0.4, 1e-15));
  CHECK_THAT(out.canceled, WithinAbs(0.3, 1e-15));
  CHECK_THAT(out.next_state.b, WithinAbs(1.3, 1e-15));
  CHECK_THAT(out.next_state.s, WithinAbs(2.2, 1e-15));
}

TEST_CASE("priced-out population leaves only cost terms", "[dynamics]") {
  auto params = kParams;
  params.p_max = 30.0;
  const auto out = step({0.0, 0.0, 0.0, 0.0}, {24.0, 0.0}, kPop, params);
  CHECK(out.demand.total == 0.0);
  CHECK(out.next_state.q == 0.0);
  CHECK(out.reward == 0.0);
  const auto costly = step({0.0, 1.0, 2.0, 0.0}, {25.0, 0.0}, kPop, params);
  CHECK_THAT(costly.reward, WithinAbs(-(1.0 + 0.5 * 2.0), 1e-15));
}

TEST_CASE("target jump penalty", "[dynamics]") {
  const auto r = reward_components({0.0, 0.0, 0.0, 0.0}, {3.0, 4.0}, kPop, kParams);
  CHECK_THAT(r.target_penalty, WithinAbs(6.4, 1e-15));
}

TEST_CASE("crash flag and clamp at q_max", "[dynamics]") {
  const auto out = step({49.5, 0.0, 0.0, 0.0}, {1.0, 0.0}, kPop, kParams);
  CHECK(out.crashed);
  CHECK(out.next_state.q == kParams.q_max);
  const auto fine = step({10.0, 4.0, 0.0, 4.0}, {6.0, 4.0}, kPop, kParams);
  CHECK_FALSE(fine.crashed);
}

TEST_CASE("pipeline overflow is truncated and flagged", "[dynamics]") {
  const auto out = step({0.0, 0.0, 3.0, 0.0}, {6.0, 4.0}, kPop, kParams);
  CHECK(out.pipeline_truncated);
  CHECK(out.next_state.b == kParams.b_max);
}

TEST_CASE("step invariants on random pairs", "[dynamics]") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_state(rng);
    const auto a = random_action(rng);
    const auto out = step(s, a, kPop, kParams);
    CHECK(in_bounds(out.next_state, kParams));
    const double up = positive_part(a.s_tar - s.s_tar_prev);
    const double down = positive_part(s.s_tar_prev - a.s_tar);
    CHECK(out.activated >= 0.0);
    CHECK(out.activated <= kParams.omega * s.b);
    CHECK(out.activated <= kParams.s_max - s.s);
    CHECK(out.canceled >= 0.0);
    CHECK(out.canceled <= kParams.chi * down);
    CHECK(out.canceled <= s.b - out.activated + up);
    const double raw_b = s.b - out.activated + up - out.canceled;
    if (raw_b <= kParams.b_max) CHECK(out.next_state.b - raw_b == 0.0);
    CHECK_THAT(reward_components(s, a, kPop, kParams).total(), WithinAbs(out.reward, 1e-12));
  }
}

TEST_CASE("fixed-pair recursion", "[dynamics]") {
  const double qd = drop_thresholds(kPop, 4.0, 4.0, kParams).max;
  for (double q : {qd, qd + 3.0, 100.0})
    CHECK_THAT(fixed_pair_step(q, 4.0, 4.0, kPop, kParams), WithinAbs(q - 2.3, 1e-12));
  CHECK(fixed_pair_step(0.0, 4.0, 4.0, kPop, kParams) == 0.0);
  CHECK(fixed_pair_step(1000.0, 1.0, 0.0, kPop, kParams) > 1000.0);
}

TEST_CASE("non-drainable pairs diverge at least linearly", "[dynamics]") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> up(1.0, 3.0), us(0.0, 1.0), uq(0.0, 100.0);
  int tested = 0;
  while (tested < 20) {
    const double p = up(rng), s = us(rng) * residual_floor(kPop, p) / kParams.mu;
    const double excess = residual_floor(kPop, p) - s * kParams.mu;
    if (!(excess > 0.0)) continue;
    ++tested;
    const double q0 = uq(rng);
    const auto traj = simulate_fixed_pair(q0, kPop, p, s, kParams, 200);
    // The bound q0 + t*delta*excess, accumulated with the recursion's own
    // operations; rounding is monotone, so the comparison is exact.
    double bound = q0;
    for (std::size_t t = 0; t < traj.size(); ++t) {
      CHECK(traj[t] >= bound);
      bound = bound + kParams.delta * (residual_floor(kPop, p) - s * kParams.mu);
    }
  }
}

TEST_CASE("zero-drift knife edge freezes the backlog", "[dynamics]") {
  // Dyadic numbers keep the knife edge exact: floor(4) = 0.25*2 + 0.25*1.5 = 0.875 = 1.75*0.5.
  auto params = kParams;
  params.mu = 0.5;
  const auto pop = validate_population({{20.0, 5.0, 2.0, 0.5},
                                        {12.0, ExtendedReal::infinity(), 0.0, 0.25},
                                        {10.0, ExtendedReal::infinity(), 0.0, 0.25}});
  const double p = 4.0, s = 1.75;
  REQUIRE(residual_floor(pop, p) == s * params.mu);
  const double qd = drop_thresholds(pop, p, s, params).max;
  for (double q : {qd, qd + 1.0, 3.0 * qd}) CHECK(fixed_pair_step(q, p, s, pop, params) == q);
}
