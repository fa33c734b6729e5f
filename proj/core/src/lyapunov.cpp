#include "sgdmlab/lyapunov.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace sgdmlab {

void LyapunovParams::validate() const {
  if (!(lambda > 0.0 && lambda <= 0.25))
    throw ConfigError("lyapunov: lambda must lie in (0, 1/4]");
  if (!(ringA >= 0.0)) throw ConfigError("lyapunov: ringA must be nonnegative");
}

LyapunovParams LyapunovParams::defaults(const ObjectiveConstants& c, double gamma) {
  LyapunovParams lp;
  lp.lambda = std::min(0.25, c.a / (4.0 * c.L + gamma * gamma));
  lp.ringA = c.K + 2.0 * lp.lambda * (c.B * c.B / (2.0 * c.L) + c.A);
  return lp;
}

bool LyapunovParams::admissible(const ObjectiveConstants& c, double gamma,
                                std::string* why) const {
  const double slack = 1e-12;
  const double cap = std::min(0.25, c.a / (4.0 * c.L + gamma * gamma));
  if (!(lambda > 0.0 && lambda <= cap * (1.0 + slack))) {
    if (why) *why = "lambda exceeds min{1/4, a/(4L + gamma^2)}";
    return false;
  }
  const double floor = c.K + 2.0 * lambda * (c.B * c.B / (2.0 * c.L) + c.A);
  if (ringA < floor * (1.0 - slack) - slack) {
    if (why) *why = "ringA below K + 2*lambda*(B^2/(2L) + A)";
    return false;
  }
  return true;
}

double lyapunov_value(const ModelParams& p, const LyapunovParams& lp,
                      const Objective& obj, const State& s) {
  if (!(p.gamma > 0.0)) throw ConfigError("lyapunov: gamma must be positive");
  lp.validate();
  const double g = p.gamma;
  const Vec m_over_g = s.m / g;
  return obj.value(s.x) +
         0.25 * g * g *
             ((s.x + m_over_g).squaredNorm() + m_over_g.squaredNorm() -
              lp.lambda * s.x.squaredNorm());
}

double generator_v(const ModelParams& p, const LyapunovParams& lp,
                   const Objective& obj, const State& s) {
  if (!(p.gamma > 0.0)) throw ConfigError("lyapunov: gamma must be positive");
  lp.validate();
  const double g = p.gamma;
  const Vec gf = obj.grad(s.x);
  const Vec grad_m_v = s.m + 0.5 * g * s.x;
  const Vec grad_x_v = gf + 0.5 * g * g * (1.0 - lp.lambda) * s.x + 0.5 * g * s.m;
  const double dim = static_cast<double>(obj.dim());
  return -grad_m_v.dot(g * s.m + gf) + grad_x_v.dot(s.m) +
         0.5 * p.beta * p.beta * dim;
}

double drift_margin(const ModelParams& p, const LyapunovParams& lp,
                    const Objective& obj, const State& s) {
  const double rhs = 0.5 * (p.gamma * lp.ringA +
                            static_cast<double>(obj.dim()) * p.beta * p.beta);
  return rhs - (generator_v(p, lp, obj, s) +
                lp.lambda * p.gamma * lyapunov_value(p, lp, obj, s));
}

namespace {

Vec ball_point(NoiseStream& st, int d, double radius) {
  Vec v = st.gauss_vec(d);
  const double n = v.norm();
  if (n == 0.0) return Vec::Zero(d);
  const double r = radius * std::pow(st.uniform(), 1.0 / d);
  return (r / n) * v;
}

PointMarginReport run_point_scan(int sample_count, double radius,
                                 std::uint64_t seed, int dim, bool with_m,
                                 const std::function<double(const State&)>& margin_of) {
  if (sample_count < 1) throw ConfigError("check: sample_count must be >= 1");
  NoiseStream st(seed);
  PointMarginReport rep;
  rep.points = sample_count;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sample_count; ++i) {
    State s;
    s.m = with_m ? ball_point(st, dim, radius) : Vec::Zero(dim);
    s.x = ball_point(st, dim, radius);
    const double mg = margin_of(s);
    if (mg < rep.worst_margin) rep.worst_margin = mg;
    if (mg < -1e-9 && rep.violating_points.size() < 16)
      rep.violating_points.push_back(s);
  }
  rep.pass = rep.worst_margin >= -1e-9;
  return rep;
}

}  // namespace

PointMarginReport drift_check(const ModelParams& p, const LyapunovParams& lp,
                              const Objective& obj, int sample_count,
                              double radius, std::uint64_t seed) {
  std::string why;
  if (!lp.admissible(obj.constants(), p.gamma, &why))
    throw ConfigError("drift_check: " + why);
  return run_point_scan(sample_count, radius, seed, obj.dim(), true,
                        [&](const State& s) { return drift_margin(p, lp, obj, s); });
}

PointMarginReport dissipativity_check(const Objective& obj, const LyapunovParams& lp,
                                      const ModelParams& p, int sample_count,
                                      double radius, std::uint64_t seed) {
  const ObjectiveConstants& c = obj.constants();
  return run_point_scan(
      sample_count, radius, seed, obj.dim(), false, [&](const State& s) {
        const double inner = s.x.dot(obj.grad(s.x));
        const double mid = 0.5 * c.a * s.x.squaredNorm() - c.K;
        const double low = 2.0 * lp.lambda *
                               (obj.value(s.x) +
                                0.25 * p.gamma * p.gamma * s.x.squaredNorm()) -
                           lp.ringA;
        return std::min(inner - mid, mid - low);
      });
}

PointMarginReport quadratic_sandwich_check(const Objective& obj, int sample_count,
                                           double radius, std::uint64_t seed) {
  const ObjectiveConstants& c = obj.constants();
  const double b_sq_term = c.B > 0.0 ? c.B * c.B / (2.0 * c.L) : 0.0;
  return run_point_scan(
      sample_count, radius, seed, obj.dim(), false, [&](const State& s) {
        const double f = obj.value(s.x);
        const double x2 = s.x.squaredNorm();
        const double lower = 0.5 * c.a * x2 - 0.5 * c.K * std::log(3.0);
        const double upper = c.L * x2 + b_sq_term + c.A;
        return std::min(f - lower, upper - f);
      });
}

double stationary_log_density(const ModelParams& p, const Objective& obj,
                              const State& s) {
  if (!(p.beta > 0.0)) throw ConfigError("stationary: beta must be positive");
  if (!(p.gamma > 0.0)) throw ConfigError("stationary: gamma must be positive");
  return -(p.gamma / (p.beta * p.beta)) *
         (s.m.squaredNorm() + 2.0 * obj.value(s.x));
}

StationaryMoments stationary_moments(const ModelParams& p, const Objective& obj) {
  if (obj.kind() != ObjectiveKind::QuadraticWell)
    throw UnsupportedObjectiveError(
        "stationary moments are closed-form for the quadratic well only");
  if (!(p.beta > 0.0 && p.gamma > 0.0))
    throw ConfigError("stationary: gamma and beta must be positive");
  StationaryMoments sm;
  sm.var_m = p.beta * p.beta / (2.0 * p.gamma);
  sm.var_x = p.beta * p.beta / (2.0 * p.gamma * obj.scale());
  return sm;
}

}  // namespace sgdmlab
