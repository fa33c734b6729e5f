#include <cmath>

#include "doctest.h"
#include "sgdmlab/schedule.hpp"

using namespace sgdmlab;

TEST_CASE("step sequences and cumulative times") {
  const StepSchedule c = StepSchedule::constant(0.1, 0.5, 1.0);
  CHECK(c.eta(1) == 0.1);
  CHECK(c.eta(1000) == 0.1);
  CHECK(c.cumulative_time(0) == 0.0);
  CHECK(c.cumulative_time(10) == doctest::Approx(1.0).epsilon(1e-14));

  const StepSchedule p = StepSchedule::polynomial(1.0, 0.5, 0.5, 1.0);
  CHECK(p.eta(1) == 1.0);
  CHECK(p.eta(4) == doctest::Approx(0.5).epsilon(1e-15));
  // direct sum: 1 + 1/sqrt(2) + 1/sqrt(3) + 1/2
  const double t4 = 1.0 + 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0) + 0.5;
  CHECK(p.cumulative_time(4) == doctest::Approx(t4).epsilon(1e-15));
  CHECK(t4 == doctest::Approx(2.7844570503761732).epsilon(1e-15));

  CHECK_THROWS_AS(c.eta(0), ConfigError);
  CHECK_THROWS_AS(StepSchedule::constant(0.0, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(StepSchedule::constant(0.1, -0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(StepSchedule::constant(0.1, 0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(StepSchedule::polynomial(1.0, 0.0, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(StepSchedule::polynomial(1.0, 1.0, 0.5, 1.0), ConfigError);
}

TEST_CASE("horizon-to-step mapping lands on the grid") {
  const StepSchedule c = StepSchedule::constant(0.1, 0.5, 1.0);
  CHECK(c.steps_for_horizon(1.0) == 10);   // grid point despite rounding
  CHECK(c.steps_for_horizon(0.999) == 9);
  CHECK(c.steps_for_horizon(0.05) == 0);
  CHECK(c.steps_for_horizon(-1.0) == 0);

  const StepSchedule p = StepSchedule::polynomial(1.0, 0.5, 0.5, 1.0);
  CHECK(p.steps_for_horizon(p.cumulative_time(4)) == 4);
  CHECK(p.steps_for_horizon(p.cumulative_time(4) - 1e-6) == 3);
}

TEST_CASE("step conditions: cap and increment scans") {
  // cap = (2θ − ω)/(2θ²) = 0.75 for θ = 1, ω = 0.5
  const StepSchedule ok = StepSchedule::constant(0.7, 0.5, 1.0);
  const ScheduleCheckReport rok = check_step_conditions(ok, 1000);
  CHECK(rok.pass);
  CHECK(rok.first_violation_k == 0);
  CHECK(rok.smallest_valid_start == 1);

  const StepSchedule big = StepSchedule::constant(0.8, 0.5, 1.0);
  const ScheduleCheckReport rbig = check_step_conditions(big, 50);
  CHECK_FALSE(rbig.pass);
  CHECK(rbig.first_violation_k == 1);
  CHECK(rbig.violated == "step_cap");
  CHECK(rbig.smallest_valid_start == 51);  // every index violates

  // η_k = 1/√k: η₁ = 1 breaks the cap, the k = 2 increment is too large,
  // everything from k = 3 on is clean.
  const StepSchedule poly = StepSchedule::polynomial(1.0, 0.5, 0.5, 1.0);
  const ScheduleCheckReport rp = check_step_conditions(poly, 1000);
  CHECK_FALSE(rp.pass);
  CHECK(rp.first_violation_k == 1);
  CHECK(rp.violated == "step_cap");
  CHECK(rp.smallest_valid_start == 3);

  // burn_in moves the enforcement window past the early violations
  const StepSchedule poly3 = StepSchedule::polynomial(1.0, 0.5, 0.5, 1.0, 3);
  const ScheduleCheckReport rp3 = check_step_conditions(poly3, 1000);
  CHECK(rp3.pass);
  CHECK(rp3.start_index == 3);
  CHECK(rp3.smallest_valid_start == 3);

  CHECK_THROWS_AS(check_step_conditions(StepSchedule::constant(0.1, 2.5, 1.0), 10),
                  ConfigError);
  CHECK_THROWS_AS(check_step_conditions(ok, 0), ConfigError);
}

TEST_CASE("weighted step sum matches the geometric closed form and its ceiling") {
  const double eta = 0.1, theta = 1.0, omega = 0.5;
  const StepSchedule c = StepSchedule::constant(eta, omega, theta);

  for (double eps : {0.0, 0.25, 0.5}) {
    for (std::int64_t n : {1LL, 10LL, 200LL}) {
      const WeightedSumResult ws = exp_weighted_step_sum(c, n, eps, theta);
      // constant steps collapse the sum to a geometric series:
      //   Σ_{k=1..n} η^{1+ε} e^{−θη(n−k)}
      const double q = std::exp(-theta * eta);
      const double direct = std::pow(eta, 1.0 + eps) *
                            (1.0 - std::pow(q, static_cast<double>(n))) /
                            (1.0 - q);
      CHECK(ws.sum == doctest::Approx(direct).epsilon(1e-12));
      const double ceiling =
          4.0 / (2.0 * theta - (4.0 * eps - 1.0) * omega) * std::pow(eta, eps);
      CHECK(ws.bound == doctest::Approx(ceiling).epsilon(1e-14));
      CHECK(ws.sum <= ws.bound);
    }
  }

  // polynomial steps: compare against a direct high-precision re-sum
  const StepSchedule p = StepSchedule::polynomial(0.5, 0.5, 0.5, 1.0);
  const std::int64_t n = 500;
  const WeightedSumResult ws = exp_weighted_step_sum(p, n, 0.25, 1.0);
  long double t_n = 0.0L;
  for (std::int64_t k = 1; k <= n; ++k)
    t_n += 0.5L / std::pow(static_cast<long double>(k), 0.5L);
  long double t_k = 0.0L, sum = 0.0L;
  for (std::int64_t k = 1; k <= n; ++k) {
    const long double e = 0.5L / std::pow(static_cast<long double>(k), 0.5L);
    t_k += e;
    sum += std::pow(e, 1.25L) * std::exp(-(t_n - t_k));
  }
  CHECK(ws.sum == doctest::Approx(static_cast<double>(sum)).epsilon(1e-12));

  CHECK_THROWS_AS(exp_weighted_step_sum(c, 10, 0.6, theta), ConfigError);
  CHECK_THROWS_AS(exp_weighted_step_sum(c, 10, -0.1, theta), ConfigError);
  CHECK_THROWS_AS(exp_weighted_step_sum(c, 0, 0.0, theta), ConfigError);
}
