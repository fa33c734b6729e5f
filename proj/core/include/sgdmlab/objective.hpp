#pragma once

#include <string>
#include <vector>

#include "sgdmlab/common.hpp"
#include "sgdmlab/rng.hpp"

namespace sgdmlab {

/// Declared regularity ledger for a target/noise pairing.
///
/// A bounds |f(0)|, B bounds |∇f(0)|, L is the gradient Lipschitz constant,
/// (a, b) the dissipativity slope/offset, K = b + B²/(2a) (read as b when
/// B = 0), A0/q and A0p/qp bound the q-th and qp-th noise moments, B1 bounds
/// the stochastic Hessian's sup operator norm (8th-moment sense), B2 the
/// operator norms of third derivatives.
///
/// Constants are declared and then *verified by sampling*, never estimated.
struct ObjectiveConstants {
  double A = 0.0;
  double B = 0.0;
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;
  double K = 0.0;
  double A0 = 0.0;
  double q = 2.0;
  double A0p = 0.0;
  double qp = 4.0;
  double B1 = 0.0;
  double B2 = 0.0;

  /// Throws ConfigError on an inconsistent ledger (K mismatch, q < 2, qp < 4,
  /// negative entries). b and B2 may be zero: the pure quadratic well has both.
  void validate() const;
};

enum class ObjectiveKind { QuadraticWell, CosinePerturbedQuadratic };

enum class NoiseKind { AdditiveGaussian, AdditiveStudentT };

/// Additive, state-independent gradient noise: ∇F(x, ξ) = ∇f(x) + ε(ξ),
/// ε iid across coordinates and draws, E ε = 0. State independence makes the
/// sup-over-x moment bounds exact and the declared A0/A0p computable in
/// closed form. Student-t coordinates are σ·t_dof (unnormalized variance
/// dof/(dof−2)), the heavy-tailed regime; dof must exceed qp.
struct GradNoiseModel {
  NoiseKind kind = NoiseKind::AdditiveGaussian;
  double scale = 1.0;
  double dof = 9.0;  // Student-t only

  void validate(double qp = 4.0) const;

  /// Exact (E|ε|^q)^{1/q} for the d-dimensional draw when q ∈ {2, 4} or the
  /// noise is Gaussian; a √d·(per-coordinate moment)^{1/q} upper bound
  /// otherwise. Requires q < dof for Student-t.
  double moment_bound(double q, int dim) const;

  /// Per-coordinate standard deviation (σ for Gaussian, σ√(dof/(dof−2)) for t).
  double coord_std() const;

  /// One ε draw; consumes exactly one flat fill of `d` values from `st`.
  void draw(NoiseStream& st, double* out, Eigen::Index d) const;
};

/// Draw a mini-batch of n noise vectors into the d×n matrix `out`, as one
/// flat column-major fill (the batch is a single shaped draw, so replaying a
/// stream piecemeal across systems stays aligned).
void draw_noise_batch(const GradNoiseModel& nm, NoiseStream& st, Mat& out);

/// A nonnegative target f with gradient, Hessian, and a declared constant
/// ledger. Immutable after construction; evaluation is pure and thread-safe.
///
/// Built-ins:
///  - QuadraticWell(scale s):   f(x) = (s/2)|x|²
///  - CosinePerturbedQuadratic: f(x) = (s/2)|x|² + amp·Σ_i(1 + cos x_i),
///    a nonconvex ripple on the well; requires amp < s so dissipativity
///    holds with slope s − amp.
class Objective {
public:
  static Objective quadratic_well(int dim, double scale);
  static Objective cosine_perturbed(int dim, double scale, double amp);

  /// Same target, replacement ledger (for deliberate-misdeclaration checks).
  Objective with_constants(const ObjectiveConstants& c) const;
  /// Same target, noise moment fields (A0, q, A0p, qp) filled from `nm`.
  Objective with_noise_constants(const GradNoiseModel& nm, double q = 2.0,
                                 double qp = 4.0) const;

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  /// max_i of the i-th diagonal third derivative magnitude; equals the
  /// operator norm for these diagonal-tensor targets.
  double third_deriv_opnorm(const Vec& x) const;

  int dim() const { return dim_; }
  ObjectiveKind kind() const { return kind_; }
  double scale() const { return scale_; }
  double amp() const { return amp_; }
  const ObjectiveConstants& constants() const { return constants_; }

  /// Global minimizer and its value. x* = 0 for both built-ins: amp < s makes
  /// the origin the only critical point of the cosine variant, where
  /// f(0) = 2·amp·d.
  Vec minimizer() const;
  double min_value() const;

private:
  Objective() = default;
  void check_finite(const Vec& x) const;

  ObjectiveKind kind_ = ObjectiveKind::QuadraticWell;
  int dim_ = 1;
  double scale_ = 1.0;
  double amp_ = 0.0;
  ObjectiveConstants constants_;
};

/// ∇f(x). Satisfies |∇f(x)| ≤ L|x| + B for the declared ledger.
Vec grad_f(const Objective& obj, const Vec& x);

/// ∇F(x, ξ) for a realized draw ε: ∇f(x) + ε.
Vec stoch_grad(const Objective& obj, const Vec& x, const Vec& eps);

/// Mini-batch gradient estimate: ∇f(x) + mean of the realized noise columns.
/// Variance of the mean scales as 1/N.
Vec minibatch_grad(const Objective& obj, const Vec& x, const Mat& noise_draws);

/// One named inequality checked by sampling.
struct CheckResult {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;  // >= 0 means the inequality held everywhere
  Vec witness_x, witness_y;   // worst-margin sample (y unused for 1-point checks)
};

struct AssumptionReport {
  std::vector<CheckResult> checks;
  bool all_pass = false;
  int sample_count = 0;
  double radius = 0.0;
};

/// Samples point pairs uniformly in the ball of `radius` and verifies the
/// declared ledger: gradient smoothness, dissipativity, linear gradient
/// growth, f ≥ 0, Hessian/third-derivative operator-norm bounds, and the
/// empirical noise mean and q/qp-th moments (CLT slack on the empirical
/// checks). Violations produce a failure entry naming the inequality and the
/// witness points; nothing throws.
AssumptionReport verify_assumptions(const Objective& obj,
                                    const GradNoiseModel& nm,
                                    int sample_count, double radius,
                                    std::uint64_t seed);

}  // namespace sgdmlab
