#include <catch_amalgamated.hpp>

#include <random>

#include "drainguard/demand.hpp"
#include "drainguard/guardrail.hpp"

using namespace drainguard;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const auto kParams = baseline_params();
const auto kPop = baseline_population();
const auto kInf = ExtendedReal::infinity();
}  // namespace

TEST_CASE("delay proxy", "[demand]") {
  CHECK(delay_proxy(0.0, 2.0, kParams) == 0.0);
  CHECK_THAT(delay_proxy(10.0, 4.0, kParams), WithinRel(3.0303030303030303, 1e-15));
  CHECK_THAT(delay_proxy(3.3, 4.0, kParams), WithinAbs(1.0, 1e-15));
}

TEST_CASE("best response", "[demand]") {
  CHECK_THAT(best_response({24.0, 4.0, 4.5, 0.1}, 2.0, 1.0), WithinAbs(24.0 / 6.5 - 1.0, 1e-15));
  CHECK_THAT(best_response({24.0, 4.0, 4.5, 0.1}, 2.0, 1.0), WithinAbs(2.692308, 1e-6));
  const TenantType residual{10.0, kInf, 0.0, 0.2};
  CHECK_THAT(best_response(residual, 6.0, 0.0), WithinAbs(0.666667, 1e-6));
  CHECK(best_response(residual, 6.0, 0.0) == best_response(residual, 6.0, 1e6));
  CHECK(best_response({3.0, 4.0, 4.5, 1.0}, 3.0, 0.0) == 0.0);
}

TEST_CASE("aggregate demand", "[demand]") {
  const auto prof = aggregate_demand(kPop, 4.0, 0.0);
  CHECK_THAT(prof.total, WithinAbs(2.65, 1e-14));
  const std::vector<double> expected{5, 3.5, 3, 2.75, 2, 1.5};
  REQUIRE(prof.per_type.size() == expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k)
    CHECK_THAT(prof.per_type[k], WithinAbs(expected[k], 1e-14));
  double sum = 0.0;
  for (std::size_t k = 0; k < kPop.size(); ++k) sum += kPop[k].rho * prof.per_type[k];
  CHECK_THAT(prof.total, WithinAbs(sum, 1e-12));
  CHECK(total_demand(kPop, 4.0, 0.0) == prof.total);

  CHECK(aggregate_demand(kPop, 24.0, 0.0).total == 0.0);
  CHECK(aggregate_demand(kPop, 30.0, 5.0).total == 0.0);
  CHECK_THAT(aggregate_demand(kPop, 4.0, 1e12).total, WithinAbs(0.9, 1e-9));
}

TEST_CASE("residual floor", "[demand]") {
  CHECK_THAT(residual_floor(kPop, 4.0), WithinAbs(0.9, 1e-15));
  CHECK_THAT(residual_floor(kPop, 6.0), WithinAbs(0.43333333333333335, 1e-15));
  CHECK_THAT(residual_floor(kPop, 1.0), WithinAbs(5.1, 1e-14));
  CHECK(residual_floor(kPop, 12.0) == 0.0);
  CHECK(residual_floor(kPop, 40.0) == 0.0);
}

TEST_CASE("drop thresholds", "[demand]") {
  const auto d = drop_thresholds(kPop, 2.0, 4.0, kParams);
  const std::vector<double> expected{16.133333333333333, 21.12, 30.8, 39.0};
  REQUIRE(d.per_type.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(d.per_type[k], WithinAbs(expected[k], 1e-12));
  CHECK_THAT(d.max, WithinAbs(39.0, 1e-12));

  const auto high = drop_thresholds(kPop, 20.0, 4.0, kParams);
  CHECK(high.per_type[1] == 0.0);
  CHECK(high.per_type[0] > 0.0);

  const auto flat = validate_population({{12.0, kInf, 0.0, 0.6}, {10.0, kInf, 0.0, 0.4}});
  CHECK(drop_thresholds(flat, 2.0, 4.0, kParams).max == 0.0);
  CHECK(drop_thresholds(flat, 2.0, 4.0, kParams).per_type.empty());
}

TEST_CASE("demand cap", "[demand]") {
  CHECK_THAT(demand_cap(kPop, 4.0), WithinAbs(2.65, 1e-14));
  CHECK_THAT(demand_cap(kPop, 2.0), WithinAbs(6.3, 1e-14));
  CHECK(demand_cap(kPop, 24.0) == 0.0);
  CHECK(demand_cap(kPop, 4.0) >= residual_floor(kPop, 4.0));
}

TEST_CASE("SLO risk", "[demand]") {
  CHECK(slo_risk(kPop, 3.0, 0.0) == 0.0);
  CHECK_THAT(slo_risk(kPop, 1.0, 5.0), WithinAbs(0.002127659574468085, 1e-15));
  const auto flat = validate_population({{12.0, kInf, 0.0, 1.0}});
  CHECK(slo_risk(flat, 1.0, 1e9) == 0.0);
}

TEST_CASE("Lipschitz certificate", "[demand]") {
  const auto a = lipschitz_certificate(kPop, 6.0, 4.0, kParams);
  CHECK_THAT(a.bound, WithinAbs(0.1919191919191919, 1e-15));
  CHECK(a.step_ok);
  const auto b = lipschitz_certificate(kPop, 2.0, 4.0, kParams);
  CHECK_THAT(b.bound, WithinAbs(1.7272727272727273, 1e-14));
  CHECK_FALSE(b.step_ok);
  const auto flat = validate_population({{12.0, kInf, 0.0, 1.0}});
  CHECK(lipschitz_certificate(flat, 2.0, 4.0, kParams).bound == 0.0);
  CHECK(lipschitz_certificate(flat, 2.0, 4.0, kParams).step_ok);
}

TEST_CASE("demand is non-increasing in price and delay", "[demand]") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> up(0.5, 30.0), ud(0.0, 50.0), dd(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = up(rng), d = ud(rng), step = dd(rng);
    CHECK(total_demand(kPop, p + step, d) <= total_demand(kPop, p, d));
    CHECK(total_demand(kPop, p, d + step) <= total_demand(kPop, p, d));
    CHECK(total_demand(kPop, p, d) <= demand_cap(kPop, p));
  }
}

TEST_CASE("residual regime and strict decrease above the floor", "[demand]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> up(1.0, 6.0), us(0.5, 4.0), uq(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double p = up(rng), s = us(rng);
    const double qd = drop_thresholds(kPop, p, s, kParams).max;
    for (double q : {qd, qd * 1.5, qd * 3.0 + 1.0})
      CHECK(total_demand(kPop, p, delay_proxy(q, s, kParams)) == residual_floor(kPop, p));

    const double q1 = uq(rng) * qd * 0.95;
    const double q2 = q1 + (qd - q1) * uq(rng);
    const double l1 = total_demand(kPop, p, delay_proxy(q1, s, kParams));
    if (q2 > q1 && l1 > residual_floor(kPop, p))
      CHECK(total_demand(kPop, p, delay_proxy(q2, s, kParams)) < l1);
  }
}

TEST_CASE("finite-difference slope stays under the Lipschitz bound", "[demand]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> up(1.0, 6.0), us(0.5, 4.0), uu(0.0, 1.0);
  const double h = 1e-4;
  for (int i = 0; i < 1000; ++i) {
    const double p = up(rng), s = us(rng);
    const double q = uu(rng) * absorbing_interval(kPop, p, s, kParams);
    const double slope = std::abs(total_demand(kPop, p, delay_proxy(q + h, s, kParams)) -
                                  total_demand(kPop, p, delay_proxy(q, s, kParams))) /
                         h;
    CHECK(slope <= lipschitz_certificate(kPop, p, s, kParams).bound + 1e-6);
  }
}
