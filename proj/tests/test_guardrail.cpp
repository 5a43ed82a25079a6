#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "drainguard/guardrail.hpp"

using namespace drainguard;
using Catch::Matchers::WithinAbs;

namespace {
const auto kParams = baseline_params();
const auto kPop = baseline_population();
}  // namespace

TEST_CASE("certify", "[guardrail]") {
  const auto r = certify(kPop, 4.0, 4.0, kParams);
  CHECK_THAT(r.residual_floor, WithinAbs(0.9, 1e-15));
  CHECK_THAT(r.service_rate, WithinAbs(3.2, 1e-15));
  CHECK_THAT(r.slack, WithinAbs(2.3, 1e-15));
  CHECK(r.drainable);
  CHECK(r.q_drop_per_type.size() == 4);
  CHECK(r.demand_cap >= r.residual_floor);

  const auto bad = certify(kPop, 1.0, 0.5, kParams);
  CHECK_THAT(bad.residual_floor, WithinAbs(5.1, 1e-14));
  CHECK_FALSE(bad.drainable);
  CHECK_FALSE(certify(kPop, 5.0, 0.0, kParams).drainable);
}

TEST_CASE("safe price closed form", "[guardrail]") {
  const auto p4 = safe_price(kPop, 4.0, kParams);
  REQUIRE(p4.finite());
  CHECK_THAT(p4.value(), WithinAbs(5.6 / 3.54, 1e-9));
  CHECK_THAT(p4.value(), WithinAbs(1.5819209039548023, 1e-12));
  CHECK(residual_floor(kPop, p4.value()) <= margin_service(4.0, kParams));

  CHECK(safe_price(kPop, 0.0, kParams).infinite());

  // Enough capacity that p_min already satisfies the margin.
  auto roomy = kParams;
  roomy.s_max = 10.0;
  CHECK(safe_price(kPop, 8.0, roomy) == ExtendedReal(roomy.p_min));

  const auto burst = safe_price(kPop.scaled(3.0), 4.0, kParams);
  REQUIRE(burst.finite());
  CHECK_THAT(burst.value(), WithinAbs(16.8 / 3.54, 1e-9));
  CHECK_THAT(burst.value(), WithinAbs(4.745762711864407, 1e-12));
}

TEST_CASE("safe price at a residual breakpoint", "[guardrail]") {
  // Target equal to the floor at p = 10, where the w=10 type leaves the active set.
  auto params = kParams;
  params.p_max = 20.0;
  params.zeta = 0.25;
  params.mu = 0.5;
  const auto pop = validate_population({{24.0, 4.0, 4.5, 0.5},
                                        {12.0, ExtendedReal::infinity(), 0.0, 0.25},
                                        {10.0, ExtendedReal::infinity(), 0.0, 0.25}});
  const double s = residual_floor(pop, 10.0) / ((1.0 - params.zeta) * params.mu);
  const auto p = safe_price(pop, s, params);
  REQUIRE(p.finite());
  CHECK(residual_floor(pop, p.value()) <= margin_service(s, params));
  CHECK_THAT(p.value(), WithinAbs(10.0, 1e-9));
}

TEST_CASE("safe price is non-increasing in capacity and certifies the margin", "[guardrail]") {
  ExtendedReal prev = ExtendedReal::infinity();
  for (int i = 0; i <= 99; ++i) {
    const double s = kParams.s_max * i / 99.0;
    const auto p = safe_price(kPop, s, kParams);
    CHECK(p <= prev);
    if (p.finite()) {
      CHECK(p.value() >= kParams.p_min);
      CHECK(p.value() <= kParams.p_max);
      CHECK(residual_floor(kPop, p.value()) <= margin_service(s, kParams));
      if (p.value() > kParams.p_min) {
        const double below = std::nextafter(p.value(), 0.0);
        CHECK(residual_floor(kPop, below) > margin_service(s, kParams) - 1e-12);
      }
    } else {
      CHECK(residual_floor(kPop, kParams.p_max) > margin_service(s, kParams));
    }
    prev = p;
  }
}

TEST_CASE("effective capacity", "[guardrail]") {
  CHECK_THAT(effective_capacity({0, 2, 2, 0}, 1.0, kParams), WithinAbs(2.2, 1e-15));
  CHECK(effective_capacity({0, 2.5, 0, 0}, 3.0, kParams) == 2.5);
  CHECK(effective_capacity({0, 4, 3, 0}, 4.0, kParams) == 4.0);
}

TEST_CASE("shield modes", "[guardrail]") {
  const SystemState full{0.0, 4.0, 0.0, 4.0};
  const auto keep = shield(full, {3.0, 4.0}, kPop, kParams);
  CHECK(keep.mode == ShieldMode::unchanged);
  CHECK(keep.executed == LeaderAction{3.0, 4.0});
  CHECK(keep.s_eff == 4.0);

  const auto lift = shield(full, {1.2, 4.0}, kPop, kParams);
  CHECK(lift.mode == ShieldMode::price_lifted);
  CHECK_THAT(lift.executed.p, WithinAbs(1.581921, 1e-6));
  CHECK(lift.executed.s_tar == 4.0);

  const auto emg = shield({0.0, 0.0, 0.0, 0.0}, {2.0, 1.0}, kPop, kParams);
  CHECK(emg.mode == ShieldMode::emergency);
  CHECK(emg.executed == LeaderAction{6.0, 4.0});
  CHECK(emg.p_safe.infinite());
  CHECK(std::string(to_string(ShieldMode::price_lifted)) == "price_lifted");
}

TEST_CASE("shield safety and minimal intervention", "[guardrail]") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const SystemState st{u(rng) * 50, u(rng) * 4, u(rng) * 3, u(rng) * 4};
    const LeaderAction prop{1.0 + 5.0 * u(rng), 4.0 * u(rng)};
    const auto out = shield(st, prop, kPop, kParams);
    if (out.mode == ShieldMode::emergency) {
      CHECK(out.executed == LeaderAction{kParams.p_max, kParams.s_max});
      continue;
    }
    CHECK(out.executed.s_tar == prop.s_tar);
    CHECK(residual_floor(kPop, out.executed.p) <= margin_service(out.s_eff, kParams));
    CHECK_FALSE(unsafe_step(st, out.executed, kPop, kParams));
    if (prop.p >= out.p_safe.value()) CHECK(out.executed == prop);
    if (out.mode == ShieldMode::price_lifted) CHECK(out.executed.p > prop.p);
  }
}

TEST_CASE("unsafe-step rules", "[guardrail]") {
  const SystemState st{0.0, 2.0, 0.0, 2.0};
  // floor(1) = 5.1 > 1.6
  CHECK(unsafe_step(st, {1.0, 2.0}, kPop, kParams, UnsafeRule::with_margin));
  CHECK(unsafe_step(st, {1.0, 2.0}, kPop, kParams, UnsafeRule::margin_free));
  // floor(p) lies between 0.95*1.6 and 1.6: unsafe with the margin only.
  const double p = 5.6 / (1.55 + 0.5);
  CHECK(unsafe_step(st, {p, 2.0}, kPop, kParams, UnsafeRule::with_margin));
  CHECK_FALSE(unsafe_step(st, {p, 2.0}, kPop, kParams, UnsafeRule::margin_free));
}

TEST_CASE("operating point", "[guardrail]") {
  const auto zero = operating_point(kPop, 4.0, 4.0, kParams);
  CHECK(zero.at_zero);
  CHECK(zero.q_star == 0.0);

  const auto op = operating_point(kPop, 4.0, 2.0, kParams);
  CHECK_FALSE(op.at_zero);
  CHECK(op.residual <= kBisectionTolerance);
  CHECK_THAT(op.q_star, WithinAbs(2.6546643962264375, 1e-9));

  CHECK_THROWS_AS(operating_point(kPop, 1.0, 0.5, kParams), NotDrainable);
  const auto six = operating_point(kPop, 6.0, 4.0, kParams);
  CHECK(six.at_zero);
}

TEST_CASE("absorbing interval", "[guardrail]") {
  CHECK_THAT(absorbing_interval(kPop, 2.0, 4.0, kParams), WithinAbs(45.3, 1e-12));
  auto wide = kParams;
  wide.p_max = 30.0;
  CHECK(absorbing_interval(kPop, 24.0, 4.0, wide) == 0.0);
  const auto flat = validate_population({{12.0, ExtendedReal::infinity(), 0.0, 1.0}});
  CHECK(absorbing_interval(flat, 2.0, 4.0, kParams) == demand_cap(flat, 2.0));
}

TEST_CASE("fixed-pair trajectories", "[guardrail]") {
  const auto op = operating_point(kPop, 4.0, 2.0, kParams);
  const auto flat = simulate_fixed_pair(op.q_star, kPop, 4.0, 2.0, kParams, 20);
  CHECK(flat.size() == 21);
  for (double q : flat) CHECK_THAT(q, WithinAbs(op.q_star, 1e-9));

  const auto down = simulate_fixed_pair(100.0, kPop, 4.0, 4.0, kParams, 60);
  const double qd = drop_thresholds(kPop, 4.0, 4.0, kParams).max;
  for (std::size_t t = 0; t + 1 < down.size() && down[t] >= qd; ++t)
    CHECK_THAT(down[t] - down[t + 1], WithinAbs(2.3, 1e-12));
}

TEST_CASE("global convergence under the step certificate", "[guardrail]") {
  for (auto [p, s] : {std::pair{4.0, 2.0}, std::pair{6.0, 4.0}, std::pair{5.0, 1.5}}) {
    const auto op = operating_point(kPop, p, s, kParams);
    const double qd = drop_thresholds(kPop, p, s, kParams).max;
    const double top = absorbing_interval(kPop, p, s, kParams);
    const bool certified = lipschitz_certificate(kPop, p, s, kParams).step_ok;
    for (double q0 : {0.0, qd / 2, 2 * qd, 100.0}) {
      const auto traj = simulate_fixed_pair(q0, kPop, p, s, kParams, 3000);
      CHECK_THAT(traj.back(), WithinAbs(op.q_star, 1e-8));
      if (!certified) continue;
      std::size_t enter = 0;
      while (traj[enter] > top) ++enter;
      const bool up = traj[enter + 1] >= traj[enter];
      for (std::size_t t = enter; t + 1 < traj.size(); ++t)
        CHECK((up ? traj[t + 1] >= traj[t] : traj[t + 1] <= traj[t]));
    }
  }
}

TEST_CASE("finite-time entry into the absorbing interval", "[guardrail]") {
  for (auto [p, s] : {std::pair{4.0, 4.0}, std::pair{2.0, 4.0}, std::pair{6.0, 2.0}}) {
    const double top = absorbing_interval(kPop, p, s, kParams);
    const auto rep = certify(kPop, p, s, kParams);
    const double q0 = 10.0 * top;
    const auto bound = static_cast<std::size_t>(
                           std::ceil((q0 - rep.q_drop) / (kParams.delta * rep.slack))) + 1;
    const auto traj = simulate_fixed_pair(q0, kPop, p, s, kParams, bound);
    bool entered = false;
    for (double q : traj) entered = entered || q <= top;
    CHECK(entered);
  }
}
