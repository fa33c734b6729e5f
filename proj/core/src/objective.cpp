#include "sgdmlab/objective.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sgdmlab {
namespace {

bool near(double u, double v, double tol) {
  return std::abs(u - v) <= tol * std::max({1.0, std::abs(u), std::abs(v)});
}

// (E|g|^q)^{1/q} for a standard d-dimensional Gaussian: the chi distribution
// moment 2^{q/2}·Γ((d+q)/2)/Γ(d/2), exact for any q > 0.
double gauss_norm_moment(double q, int d) {
  const double lg =
      0.5 * q * std::numbers::ln2 + std::lgamma(0.5 * (d + q)) - std::lgamma(0.5 * d);
  return std::exp(lg / q);
}

// E|t|^q for a standard Student-t coordinate, q < dof.
double t_coord_abs_moment(double q, double dof) {
  const double lg = 0.5 * q * std::log(dof) + std::lgamma(0.5 * (q + 1.0)) +
                    std::lgamma(0.5 * (dof - q)) - 0.5 * std::log(std::numbers::pi) -
                    std::lgamma(0.5 * dof);
  return std::exp(lg);
}

}  // namespace

void ObjectiveConstants::validate() const {
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("constants: ") + msg);
  };
  req(A >= 0 && B >= 0 && b >= 0 && K >= 0 && B1 >= 0 && B2 >= 0 && A0 >= 0 && A0p >= 0,
      "negative entry");
  req(L > 0, "L must be positive");
  req(a > 0, "a must be positive");
  req(q >= 2.0, "q must be >= 2");
  req(qp >= 4.0, "qp must be >= 4");
  req(near(K, b + B * B / (2.0 * a), 1e-12), "K must equal b + B^2/(2a)");
}

void GradNoiseModel::validate(double qp_req) const {
  if (!(scale >= 0.0)) throw ConfigError("noise: scale must be nonnegative");
  if (kind == NoiseKind::AdditiveStudentT && !(dof > qp_req))
    throw ConfigError("noise: Student-t dof must exceed qp");
}

double GradNoiseModel::coord_std() const {
  if (kind == NoiseKind::AdditiveGaussian) return scale;
  return scale * std::sqrt(dof / (dof - 2.0));
}

double GradNoiseModel::moment_bound(double q, int dim) const {
  const double d = static_cast<double>(dim);
  if (kind == NoiseKind::AdditiveGaussian) return scale * gauss_norm_moment(q, dim);
  if (!(q < dof)) throw ConfigError("noise: moment order must be below Student-t dof");
  const double m2 = dof / (dof - 2.0);
  if (q == 2.0) return scale * std::sqrt(d * m2);
  if (q == 4.0) {
    // E|ε|^4 = Σ E ε_i^4 + Σ_{i≠j} E ε_i² E ε_j², exact for iid coordinates.
    const double m4 = 3.0 * dof * dof / ((dof - 2.0) * (dof - 4.0));
    return scale * std::pow(d * m4 + d * (d - 1.0) * m2 * m2, 0.25);
  }
  // |ε|^q ≤ d^{q/2−1} Σ|ε_i|^q (power mean), giving a valid declared bound.
  return scale * std::sqrt(d) * std::pow(t_coord_abs_moment(q, dof), 1.0 / q);
}

void GradNoiseModel::draw(NoiseStream& st, double* out, Eigen::Index d) const {
  if (kind == NoiseKind::AdditiveGaussian) {
    st.gauss_fill(out, d);
  } else {
    st.student_t_fill(out, d, dof);
  }
  for (Eigen::Index i = 0; i < d; ++i) out[i] *= scale;
}

void draw_noise_batch(const GradNoiseModel& nm, NoiseStream& st, Mat& out) {
  // One flat fill over the whole matrix; column i is draw i.
  if (nm.kind == NoiseKind::AdditiveGaussian) {
    st.gauss_fill(out.data(), out.size());
  } else {
    st.student_t_fill(out.data(), out.size(), nm.dof);
  }
  out *= nm.scale;
}

Objective Objective::quadratic_well(int dim, double scale) {
  if (dim < 1) throw ConfigError("objective: dim must be >= 1");
  // scale = 0 is the flat target (∇f ≡ 0) used by pure-transport sanity
  // configurations; its all-zero ledger is intentionally not a valid
  // dissipative declaration, and contraction-dependent paths reject it.
  if (!(scale >= 0.0)) throw ConfigError("objective: scale must be nonnegative");
  Objective o;
  o.kind_ = ObjectiveKind::QuadraticWell;
  o.dim_ = dim;
  o.scale_ = scale;
  ObjectiveConstants c;
  c.A = 0.0;
  c.B = 0.0;
  c.L = scale;  // ∇f = s·x
  c.a = scale;  // equality case of dissipativity, b = 0
  c.b = 0.0;
  c.K = 0.0;
  c.B1 = scale;  // Hessian is s·I everywhere
  c.B2 = 0.0;
  o.constants_ = c;
  return o;
}

Objective Objective::cosine_perturbed(int dim, double scale, double amp) {
  if (dim < 1) throw ConfigError("objective: dim must be >= 1");
  if (!(scale > 0.0)) throw ConfigError("objective: scale must be positive");
  if (!(amp >= 0.0 && amp < scale))
    throw ConfigError("objective: amp must lie in [0, scale) so the well stays dissipative");
  Objective o;
  o.kind_ = ObjectiveKind::CosinePerturbedQuadratic;
  o.dim_ = dim;
  o.scale_ = scale;
  o.amp_ = amp;
  ObjectiveConstants c;
  const double L = scale + amp;  // sup Hessian = s + amp at cos = −1
  c.A = 2.0 * amp * dim;         // f(0) = amp·Σ(1 + cos 0)
  c.B = 0.0;                     // ∇f(0) = 0
  c.L = L;
  // |sin u − sin v| ≤ |u − v| per coordinate, so slope s − amp always works;
  // the declared offset b keeps headroom on top of that.
  c.a = scale - amp;
  c.b = amp * dim * (1.0 + L);
  c.K = c.b;
  c.B1 = L;
  c.B2 = amp;  // third derivatives are amp·sin(x_i) on the diagonal
  o.constants_ = c;
  return o;
}

Objective Objective::with_constants(const ObjectiveConstants& c) const {
  Objective o = *this;
  o.constants_ = c;
  return o;
}

Objective Objective::with_noise_constants(const GradNoiseModel& nm, double q,
                                          double qp) const {
  nm.validate(qp);
  Objective o = *this;
  o.constants_.q = q;
  o.constants_.qp = qp;
  o.constants_.A0 = nm.moment_bound(q, dim_);
  o.constants_.A0p = nm.moment_bound(qp, dim_);
  return o;
}

void Objective::check_finite(const Vec& x) const {
  if (x.size() != dim_) throw ConfigError("objective: dimension mismatch");
  if (!x.allFinite()) throw std::domain_error("objective: non-finite input");
}

double Objective::value(const Vec& x) const {
  check_finite(x);
  double v = 0.5 * scale_ * x.squaredNorm();
  if (kind_ == ObjectiveKind::CosinePerturbedQuadratic)
    v += amp_ * (x.array().cos() + 1.0).sum();
  return v;
}

Vec Objective::grad(const Vec& x) const {
  check_finite(x);
  if (kind_ == ObjectiveKind::QuadraticWell) return scale_ * x;
  return scale_ * x - amp_ * x.array().sin().matrix();
}

Mat Objective::hessian(const Vec& x) const {
  check_finite(x);
  if (kind_ == ObjectiveKind::QuadraticWell)
    return scale_ * Mat::Identity(dim_, dim_);
  Mat h = Mat::Zero(dim_, dim_);
  h.diagonal() = scale_ - amp_ * x.array().cos();
  return h;
}

double Objective::third_deriv_opnorm(const Vec& x) const {
  check_finite(x);
  if (kind_ == ObjectiveKind::QuadraticWell) return 0.0;
  return amp_ * x.array().sin().abs().maxCoeff();
}

Vec Objective::minimizer() const { return Vec::Zero(dim_); }

double Objective::min_value() const {
  return kind_ == ObjectiveKind::QuadraticWell ? 0.0 : 2.0 * amp_ * dim_;
}

Vec grad_f(const Objective& obj, const Vec& x) { return obj.grad(x); }

Vec stoch_grad(const Objective& obj, const Vec& x, const Vec& eps) {
  return obj.grad(x) + eps;
}

Vec minibatch_grad(const Objective& obj, const Vec& x, const Mat& noise_draws) {
  if (noise_draws.cols() < 1) throw ConfigError("minibatch_grad: empty batch");
  if (noise_draws.rows() != x.size())
    throw ConfigError("minibatch_grad: draw dimension mismatch");
  return obj.grad(x) + noise_draws.rowwise().mean();
}

namespace {

// Uniform point in the d-ball of given radius.
Vec ball_point(NoiseStream& st, int d, double radius) {
  Vec v = st.gauss_vec(d);
  const double n = v.norm();
  if (n == 0.0) return Vec::Zero(d);
  const double r = radius * std::pow(st.uniform(), 1.0 / d);
  return (r / n) * v;
}

struct MarginTracker {
  double worst = std::numeric_limits<double>::infinity();
  Vec wx, wy;
  void offer(double margin, const Vec& x, const Vec& y = Vec()) {
    if (margin < worst) {
      worst = margin;
      wx = x;
      wy = y;
    }
  }
  CheckResult finish(const std::string& name, double tol) const {
    CheckResult r;
    r.name = name;
    r.worst_margin = worst;
    r.pass = worst >= -tol;
    r.witness_x = wx;
    r.witness_y = wy;
    return r;
  }
};

}  // namespace

AssumptionReport verify_assumptions(const Objective& obj, const GradNoiseModel& nm,
                                    int sample_count, double radius,
                                    std::uint64_t seed) {
  if (sample_count < 1) throw ConfigError("verify_assumptions: sample_count >= 1");
  const ObjectiveConstants& c = obj.constants();
  const int d = obj.dim();
  NoiseStream st(seed);

  MarginTracker smooth, dissip, growth, nonneg, hess_l, hess_b1, third;
  Eigen::SelfAdjointEigenSolver<Mat> es;
  for (int i = 0; i < sample_count; ++i) {
    const Vec x = ball_point(st, d, radius);
    const Vec y = ball_point(st, d, radius);
    const Vec gx = obj.grad(x);
    const Vec gy = obj.grad(y);
    const Vec u = x - y;
    smooth.offer(c.L * u.norm() - (gx - gy).norm(), x, y);
    dissip.offer(u.dot(gx - gy) - (c.a * u.squaredNorm() - c.b), x, y);
    growth.offer(c.L * x.norm() + c.B - gx.norm(), x);
    nonneg.offer(obj.value(x), x);
    es.compute(obj.hessian(x), Eigen::EigenvaluesOnly);
    const double opnorm = es.eigenvalues().cwiseAbs().maxCoeff();
    hess_l.offer(c.L - opnorm, x);
    hess_b1.offer(c.B1 - opnorm, x);  // additive noise: stochastic Hessian = ∇²f
    third.offer(c.B2 - obj.third_deriv_opnorm(x), x);
  }

  // Empirical noise checks: mean and the q/qp moments against declared
  // bounds, with CLT slack (these are sampled estimates, not identities).
  MarginTracker nmean, nq, nqp;
  {
    Vec sum = Vec::Zero(d);
    double mq = 0.0, mqp = 0.0;
    Vec eps(d);
    for (int i = 0; i < sample_count; ++i) {
      nm.draw(st, eps.data(), d);
      sum += eps;
      const double r = eps.norm();
      mq += std::pow(r, c.q);
      mqp += std::pow(r, c.qp);
    }
    const double n = static_cast<double>(sample_count);
    const double mean_tol = 5.0 * nm.coord_std() / std::sqrt(n);
    nmean.offer(mean_tol - (sum / n).cwiseAbs().maxCoeff(), sum / n);
    const double emp_q = std::pow(mq / n, 1.0 / c.q);
    const double emp_qp = std::pow(mqp / n, 1.0 / c.qp);
    // 5% multiplicative slack; heavy tails make the qp estimate noisy.
    nq.offer(c.A0 * 1.05 - emp_q, Vec::Constant(1, emp_q));
    nqp.offer(c.A0p * 1.10 - emp_qp, Vec::Constant(1, emp_qp));
  }

  AssumptionReport rep;
  rep.sample_count = sample_count;
  rep.radius = radius;
  const double tol = 1e-10;
  rep.checks.push_back(smooth.finish("smoothness", tol));
  rep.checks.push_back(dissip.finish("dissipativity", tol));
  rep.checks.push_back(growth.finish("gradient_growth", tol));
  rep.checks.push_back(nonneg.finish("nonnegativity", tol));
  rep.checks.push_back(hess_l.finish("hessian_lipschitz", tol));
  rep.checks.push_back(hess_b1.finish("hessian_moment_bound", tol));
  rep.checks.push_back(third.finish("third_derivative_bound", tol));
  if (nm.scale > 0.0) {
    rep.checks.push_back(nmean.finish("noise_mean_zero", 0.0));
    if (c.A0 > 0.0) rep.checks.push_back(nq.finish("noise_moment_q", 0.0));
    if (c.A0p > 0.0) rep.checks.push_back(nqp.finish("noise_moment_qp", 0.0));
  }
  rep.all_pass = true;
  for (const auto& ch : rep.checks) rep.all_pass = rep.all_pass && ch.pass;
  return rep;
}

}  // namespace sgdmlab
