#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sgdmlab/lyapunov.hpp"

using namespace sgdmlab;

namespace {

State random_state(std::mt19937_64& gen, int d, double radius) {
  std::normal_distribution<double> n(0.0, radius);
  State s;
  s.m = Vec(d);
  s.x = Vec(d);
  for (int i = 0; i < d; ++i) {
    s.m[i] = n(gen);
    s.x[i] = n(gen);
  }
  return s;
}

}  // namespace

TEST_CASE("energy value matches its defining expression") {
  std::mt19937_64 gen(17);
  const Objective obj = Objective::cosine_perturbed(3, 1.0, 0.2);
  ModelParams p;
  p.gamma = 5.0;
  p.d = 3;
  LyapunovParams lp = LyapunovParams::defaults(obj.constants(), p.gamma);
  for (int t = 0; t < 30; ++t) {
    const State s = random_state(gen, 3, 3.0);
    const double g = p.gamma;
    const double want = obj.value(s.x) +
                        (g * g / 4.0) * ((s.x + s.m / g).squaredNorm() +
                                         (s.m / g).squaredNorm() -
                                         lp.lambda * s.x.squaredNorm());
    CHECK(lyapunov_value(p, lp, obj, s) == doctest::Approx(want).epsilon(1e-13));
    CHECK(lyapunov_value(p, lp, obj, s) >= 0.0);
  }
}

TEST_CASE("generator closed forms agree with finite-difference assembly") {
  std::mt19937_64 gen(19);
  for (int d : {1, 3}) {
    for (int which : {0, 1}) {
      const Objective obj = which == 0
                                ? Objective::quadratic_well(d, 1.5)
                                : Objective::cosine_perturbed(d, 1.0, 0.3);
      ModelParams p;
      p.gamma = 5.0;
      p.beta = 0.8;
      p.d = d;
      const LyapunovParams lp = LyapunovParams::defaults(obj.constants(), p.gamma);
      for (int t = 0; t < 25; ++t) {
        const State s = random_state(gen, d, 2.5);
        const double got = generator_v(p, lp, obj, s);
        const double want = oracle::fd_generator_v(p, lp, obj, s);
        CHECK(got == doctest::Approx(want).epsilon(5e-5));
      }
    }
  }
}

TEST_CASE("energy parameter defaults are the admissibility corner") {
  const Objective obj = Objective::cosine_perturbed(2, 1.0, 0.1);
  const ObjectiveConstants& c = obj.constants();
  const double gamma = 5.0;
  const LyapunovParams lp = LyapunovParams::defaults(c, gamma);
  CHECK(lp.lambda ==
        doctest::Approx(std::min(0.25, c.a / (4.0 * c.L + gamma * gamma)))
            .epsilon(1e-15));
  CHECK(lp.ringA ==
        doctest::Approx(c.K + 2.0 * lp.lambda * (c.B * c.B / (2.0 * c.L) + c.A))
            .epsilon(1e-15));
  CHECK(lp.admissible(c, gamma));

  LyapunovParams too_big = lp;
  too_big.lambda = 0.25;  // far above a/(4L + γ²) ≈ 0.031
  std::string why;
  CHECK_FALSE(too_big.admissible(c, gamma, &why));
  CHECK_FALSE(why.empty());

  LyapunovParams bad;
  bad.lambda = 0.3;  // the value cap is 1/4
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.lambda = 0.2;
  bad.ringA = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sampled drift and dissipation inequalities hold at the defaults") {
  for (int d : {1, 4}) {
    for (int which : {0, 1}) {
      const Objective obj = which == 0
                                ? Objective::quadratic_well(d, 1.0)
                                : Objective::cosine_perturbed(d, 1.0, 0.2);
      ModelParams p;
      p.gamma = 8.0;
      p.beta = 1.0;
      p.d = d;
      const LyapunovParams lp = LyapunovParams::defaults(obj.constants(), p.gamma);

      const PointMarginReport drift = drift_check(p, lp, obj, 2000, 10.0, 5);
      CHECK(drift.pass);
      CHECK(drift.worst_margin >= -1e-9);
      CHECK(drift.violating_points.empty());

      const PointMarginReport diss = dissipativity_check(obj, lp, p, 2000, 10.0, 6);
      CHECK(diss.pass);
      const PointMarginReport sand = quadratic_sandwich_check(obj, 2000, 10.0, 7);
      CHECK(sand.pass);
    }
  }
}

TEST_CASE("drift check refuses inadmissible energy parameters") {
  const Objective obj = Objective::cosine_perturbed(2, 1.0, 0.1);
  ModelParams p;
  p.gamma = 5.0;
  p.d = 2;
  LyapunovParams lp = LyapunovParams::defaults(obj.constants(), p.gamma);
  lp.lambda = 0.25;  // breaks the cap for this γ
  CHECK_THROWS_AS(drift_check(p, lp, obj, 100, 5.0, 1), ConfigError);
}

TEST_CASE("stationary density and closed-form variances") {
  const Objective obj = Objective::quadratic_well(2, 4.0);
  ModelParams p;
  p.gamma = 5.0;
  p.beta = 1.0;
  p.d = 2;

  std::mt19937_64 gen(23);
  for (int t = 0; t < 10; ++t) {
    const State s = random_state(gen, 2, 2.0);
    const double want =
        -(p.gamma / (p.beta * p.beta)) * (s.m.squaredNorm() + 2.0 * obj.value(s.x));
    CHECK(stationary_log_density(p, obj, s) == doctest::Approx(want).epsilon(1e-13));
  }

  const StationaryMoments sm = stationary_moments(p, obj);
  CHECK(sm.var_m == doctest::Approx(0.1).epsilon(1e-15));           // β²/(2γ)
  CHECK(sm.var_x == doctest::Approx(0.025).epsilon(1e-15));         // β²/(2γs)

  const Objective cp = Objective::cosine_perturbed(2, 1.0, 0.1);
  CHECK_THROWS_AS(stationary_moments(p, cp), UnsupportedObjectiveError);
}
