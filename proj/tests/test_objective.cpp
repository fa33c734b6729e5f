#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sgdmlab/objective.hpp"
#include "sgdmlab/rng.hpp"

using namespace sgdmlab;

namespace {

Vec random_point(std::mt19937_64& gen, int d, double radius) {
  std::normal_distribution<double> n(0.0, radius);
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = n(gen);
  return x;
}

}  // namespace

TEST_CASE("quadratic well matches finite-difference derivatives") {
  std::mt19937_64 gen(7);
  for (int d : {1, 3}) {
    const Objective obj = Objective::quadratic_well(d, 2.5);
    auto f = [&](const Vec& x) { return obj.value(x); };
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = random_point(gen, d, 3.0);
      CHECK(obj.value(x) == doctest::Approx(1.25 * x.squaredNorm()).epsilon(1e-12));
      const Vec g = obj.grad(x);
      const Vec g_fd = oracle::fd_gradient(f, x);
      CHECK((g - g_fd).norm() <= 1e-6 * (1.0 + g.norm()));
      const Mat h = obj.hessian(x);
      const Mat h_fd = oracle::fd_hessian(f, x);
      CHECK((h - h_fd).norm() <= 1e-5 * (1.0 + h.norm()));
      CHECK(obj.third_deriv_opnorm(x) == 0.0);
    }
  }
}

TEST_CASE("cosine-perturbed well matches finite-difference derivatives") {
  std::mt19937_64 gen(8);
  for (int d : {1, 4}) {
    const Objective obj = Objective::cosine_perturbed(d, 1.0, 0.25);
    auto f = [&](const Vec& x) { return obj.value(x); };
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = random_point(gen, d, 3.0);
      double want = 0.5 * x.squaredNorm();
      double third = 0.0;
      for (int i = 0; i < d; ++i) {
        want += 0.25 * (1.0 + std::cos(x[i]));
        third = std::max(third, std::abs(0.25 * std::sin(x[i])));
      }
      CHECK(obj.value(x) == doctest::Approx(want).epsilon(1e-12));
      const Vec g_fd = oracle::fd_gradient(f, x);
      CHECK((obj.grad(x) - g_fd).norm() <= 1e-6 * (1.0 + g_fd.norm()));
      const Mat h_fd = oracle::fd_hessian(f, x);
      CHECK((obj.hessian(x) - h_fd).norm() <= 1e-5 * (1.0 + h_fd.norm()));
      CHECK(obj.third_deriv_opnorm(x) == doctest::Approx(third).epsilon(1e-12));
    }
  }
}

TEST_CASE("declared ledgers carry the closed-form constants") {
  const Objective qw = Objective::quadratic_well(3, 2.0);
  const ObjectiveConstants& c = qw.constants();
  CHECK(c.L == 2.0);
  CHECK(c.a == 2.0);
  CHECK(c.b == 0.0);
  CHECK(c.K == 0.0);
  CHECK(c.A == 0.0);
  CHECK(c.B == 0.0);
  CHECK(c.B1 == 2.0);
  CHECK(c.B2 == 0.0);
  CHECK_NOTHROW(c.validate());

  const Objective cp = Objective::cosine_perturbed(2, 1.0, 0.1);
  const ObjectiveConstants& k = cp.constants();
  CHECK(k.L == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(k.a == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(k.A == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(k.B == 0.0);
  CHECK(k.b == doctest::Approx(0.1 * 2 * 2.1).epsilon(1e-15));
  CHECK(k.K == k.b);  // B = 0 collapses K to b
  CHECK(k.B1 == k.L);
  CHECK(k.B2 == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_NOTHROW(k.validate());
}

TEST_CASE("ledger validation rejects inconsistent declarations") {
  const Objective qw = Objective::quadratic_well(1, 1.0);
  ObjectiveConstants c = qw.constants();
  c.B = 1.0;  // K must now equal b + B²/(2a) = 0.5, but K is still 0
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.K = 0.5;
  CHECK_NOTHROW(c.validate());
  c.q = 1.5;  // below the second-moment floor
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("objective constructors reject bad shapes") {
  CHECK_THROWS_AS(Objective::quadratic_well(0, 1.0), ConfigError);
  CHECK_THROWS_AS(Objective::quadratic_well(1, -1.0), ConfigError);
  CHECK_THROWS_AS(Objective::cosine_perturbed(1, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(Objective::cosine_perturbed(1, 1.0, -0.1), ConfigError);
  CHECK_THROWS_AS(Objective::cosine_perturbed(1, 0.0, 0.0), ConfigError);

  // The flat target is allowed but its ledger is not a valid declaration.
  const Objective flat = Objective::quadratic_well(2, 0.0);
  CHECK(flat.grad(Vec::Ones(2)).norm() == 0.0);
  CHECK_THROWS_AS(flat.constants().validate(), ConfigError);
}

TEST_CASE("objective evaluation guards dimension and finiteness") {
  const Objective obj = Objective::quadratic_well(2, 1.0);
  CHECK_THROWS_AS(obj.value(Vec::Ones(3)), ConfigError);
  Vec bad = Vec::Ones(2);
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(obj.value(bad), std::domain_error);
  CHECK_THROWS_AS(obj.grad(bad), std::domain_error);
}

TEST_CASE("minimizer sits at the origin with the declared value") {
  const Objective qw = Objective::quadratic_well(3, 2.0);
  CHECK(qw.minimizer().norm() == 0.0);
  CHECK(qw.min_value() == 0.0);

  const Objective cp = Objective::cosine_perturbed(2, 1.0, 0.3);
  CHECK(cp.minimizer().norm() == 0.0);
  CHECK(cp.min_value() == doctest::Approx(2 * 0.3 * 2.0).epsilon(1e-15));
  // origin is a genuine minimum: nearby values are larger
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    const Vec x = random_point(gen, 2, 1.0);
    CHECK(cp.value(x) >= cp.min_value() - 1e-12);
  }
}

TEST_CASE("gradient growth stays within the declared envelope") {
  std::mt19937_64 gen(11);
  for (const Objective& obj :
       {Objective::quadratic_well(2, 1.5), Objective::cosine_perturbed(2, 1.0, 0.4)}) {
    const ObjectiveConstants& c = obj.constants();
    for (int t = 0; t < 200; ++t) {
      const Vec x = random_point(gen, obj.dim(), 4.0);
      CHECK(obj.value(x) >= 0.0);
      CHECK(obj.grad(x).norm() <= c.L * x.norm() + c.B + 1e-12);
      CHECK(x.dot(obj.grad(x)) >= 0.5 * c.a * x.squaredNorm() - c.K - 1e-12);
    }
  }
}

TEST_CASE("additive noise model: moments and draw accounting") {
  GradNoiseModel nm;
  nm.kind = NoiseKind::AdditiveGaussian;
  nm.scale = 0.7;
  CHECK_NOTHROW(nm.validate(4.0));
  CHECK(nm.coord_std() == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(nm.moment_bound(2.0, 4) == doctest::Approx(0.7 * 2.0).epsilon(1e-12));

  NoiseStream st(99, StreamMode::IndependentNormals);
  const int n = 200000;
  Vec draw(2);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    nm.draw(st, draw.data(), 2);
    sum += draw[0] + draw[1];
    sumsq += draw.squaredNorm();
  }
  const double mean = sum / (2.0 * n);
  const double var = sumsq / (2.0 * n);
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(0.49).epsilon(0.02));

  GradNoiseModel heavy;
  heavy.kind = NoiseKind::AdditiveStudentT;
  heavy.scale = 1.0;
  heavy.dof = 3.0;
  CHECK_THROWS_AS(heavy.validate(4.0), ConfigError);  // dof must exceed qp
  heavy.dof = 9.0;
  CHECK_NOTHROW(heavy.validate(4.0));
  CHECK(heavy.coord_std() ==
        doctest::Approx(std::sqrt(9.0 / 7.0)).epsilon(1e-12));
}

TEST_CASE("mini-batch gradient is the full gradient plus the draw average") {
  const Objective obj = Objective::cosine_perturbed(3, 1.0, 0.2);
  std::mt19937_64 gen(3);
  const Vec x = random_point(gen, 3, 2.0);
  Mat draws(3, 5);
  for (int c = 0; c < 5; ++c) draws.col(c) = random_point(gen, 3, 1.0);
  const Vec got = minibatch_grad(obj, x, draws);
  const Vec want = obj.grad(x) + draws.rowwise().mean();
  CHECK((got - want).norm() <= 1e-14);

  const Vec one = stoch_grad(obj, x, draws.col(0));
  CHECK((one - (obj.grad(x) + draws.col(0))).norm() <= 1e-14);
}

TEST_CASE("sampled verification accepts honest ledgers and flags inflated ones") {
  GradNoiseModel nm;
  nm.scale = 0.5;
  const Objective obj =
      Objective::cosine_perturbed(2, 1.0, 0.2).with_noise_constants(nm);
  const AssumptionReport ok = verify_assumptions(obj, nm, 4000, 6.0, 21);
  CHECK(ok.all_pass);

  ObjectiveConstants lied = obj.constants();
  lied.L = 0.5;             // actual sup Hessian is 1.2
  lied.B1 = 0.5;
  const Objective bad = obj.with_constants(lied);
  const AssumptionReport rep = verify_assumptions(bad, nm, 4000, 6.0, 21);
  CHECK_FALSE(rep.all_pass);
  bool smoothness_flagged = false;
  for (const auto& c : rep.checks) {
    if (!c.pass && (c.name.find("smooth") != std::string::npos ||
                    c.name.find("hessian") != std::string::npos)) {
      smoothness_flagged = true;
    }
  }
  CHECK(smoothness_flagged);
}
