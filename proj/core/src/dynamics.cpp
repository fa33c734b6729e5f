#include "sgdmlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

namespace sgdmlab {

namespace {

void check_step_inputs(const State& s, const Objective& obj) {
  if (s.m.size() != obj.dim() || s.x.size() != obj.dim())
    throw ConfigError("step: state dimension does not match the objective");
  if (!s.finite()) throw BlowupError("step: starting state is not finite", -1);
}

}  // namespace

State sgdm_step(const State& s, double eta, const ModelParams& p,
                const Objective& obj, const GradNoiseModel& noise,
                const Vec& zeta, const Mat& noise_batch,
                std::int64_t step_index) {
  (void)noise;
  check_step_inputs(s, obj);
  if (!(eta > 0.0)) throw ConfigError("step: eta must be positive");
  if (zeta.size() != obj.dim())
    throw ConfigError("step: zeta must be d-dimensional");
  const Vec g = minibatch_grad(obj, s.x, noise_batch);
  State out;
  out.m = s.m - (p.gamma * eta) * s.m - eta * g +
          (p.beta * std::sqrt(eta)) * zeta;
  out.x = s.x + eta * s.m;
  if (!out.finite())
    throw BlowupError("discrete recursion left the finite range", step_index);
  return out;
}

State intermediate_step(const State& s, double eta, const ModelParams& p,
                        const Objective& obj, const GradNoiseModel& noise,
                        const Vec& dB, const Mat& noise_batch,
                        std::int64_t step_index) {
  (void)noise;
  check_step_inputs(s, obj);
  if (!(eta > 0.0)) throw ConfigError("step: eta must be positive");
  if (dB.size() != obj.dim()) throw ConfigError("step: dB must be d-dimensional");
  const Vec g = minibatch_grad(obj, s.x, noise_batch);
  State out;
  out.m = s.m - (p.gamma * eta) * s.m - eta * g + p.beta * dB;
  out.x = s.x + eta * s.m;
  if (!out.finite())
    throw BlowupError("frozen-coefficient step left the finite range",
                      step_index);
  return out;
}

State langevin_em_step(const State& s, double delta, const ModelParams& p,
                       const Objective& obj, const Vec& dB,
                       std::int64_t step_index) {
  check_step_inputs(s, obj);
  if (!(delta > 0.0)) throw ConfigError("step: delta must be positive");
  if (dB.size() != obj.dim()) throw ConfigError("step: dB must be d-dimensional");
  State out;
  out.m = s.m - delta * (p.gamma * s.m + obj.grad(s.x)) + p.beta * dB;
  out.x = s.x + delta * s.m;
  if (!out.finite())
    throw BlowupError("diffusion substep left the finite range", step_index);
  return out;
}

namespace {

/// Mean operator and Itô covariance of the linear transition over one span
/// short enough that the augmented exponential's entries stay within a few
/// orders of magnitude: with B = [[−D, Σ], [0, Dᵀ]]·dt, the exponential's
/// lower-right block is e^{Dᵀdt} and the upper-right is e^{−Ddt}·(∫ … du),
/// so M = (lower-right)ᵀ and C = Mᵀ-free read-off (lower-right)ᵀ·(upper-right).
void one_span_transition(int d, double gamma, double beta, double s, double dt,
                         Mat* mean_op, Mat* cov) {
  const int n = 2 * d;
  Mat D = Mat::Zero(n, n);
  D.topLeftCorner(d, d) = -gamma * Mat::Identity(d, d);
  D.topRightCorner(d, d) = -s * Mat::Identity(d, d);
  D.bottomLeftCorner(d, d) = Mat::Identity(d, d);

  Mat aug = Mat::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = -dt * D;
  aug.topRightCorner(n, n).topLeftCorner(d, d) =
      (dt * beta * beta) * Mat::Identity(d, d);
  aug.bottomRightCorner(n, n) = dt * D.transpose();

  const Mat e = aug.exp();
  const Mat lower_right = e.bottomRightCorner(n, n);  // e^{Dᵀ·dt}
  *mean_op = lower_right.transpose();
  *cov = lower_right.transpose() * e.topRightCorner(n, n);
  *cov = 0.5 * (*cov + cov->transpose());
}

}  // namespace

OuTransition::OuTransition(int dim, double gamma, double beta,
                           double quad_scale, double dt) {
  if (dim < 1) throw ConfigError("transition: dim must be >= 1");
  if (!(gamma >= 0.0) || !(beta >= 0.0))
    throw ConfigError("transition: gamma and beta must be nonnegative");
  if (!std::isfinite(dt) || dt < 0.0)
    throw ConfigError("transition: span must be finite and >= 0");
  d_ = dim;
  dt_ = dt;
  const int n = 2 * dim;
  if (dt == 0.0) {
    mean_op_ = Mat::Identity(n, n);
    cov_ = Mat::Zero(n, n);
    cov_sqrt_ = Mat::Zero(n, n);
    return;
  }

  // Keep |eigenvalue|·span ≲ 6.9 per sub-span (dynamic range ≤ ~1e3 inside
  // the augmented exponential), composing the exact sub-span laws.
  const double rate = gamma + std::abs(quad_scale) + 1.0;
  const int spans = std::max(1, static_cast<int>(std::ceil(dt * rate / 6.9)));
  Mat base_m, base_c;
  one_span_transition(dim, gamma, beta, quad_scale, dt / spans, &base_m,
                      &base_c);
  Mat m = base_m;
  Mat c = base_c;
  for (int k = 1; k < spans; ++k) {
    c = base_m * c * base_m.transpose() + base_c;
    c = 0.5 * (c + c.transpose());
    m = base_m * m;
  }
  mean_op_ = m;
  cov_ = c;
  Eigen::SelfAdjointEigenSolver<Mat> es(cov_);
  if (es.info() != Eigen::Success)
    throw ConfigError("transition: covariance eigendecomposition failed");
  const Vec ev = es.eigenvalues().cwiseMax(0.0);
  cov_sqrt_ = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
}

State OuTransition::apply(const State& s, const Vec& gauss) const {
  if (s.m.size() != d_ || s.x.size() != d_)
    throw ConfigError("transition: state dimension mismatch");
  if (gauss.size() != 2 * d_)
    throw ConfigError("transition: gauss must have 2·dim entries");
  Vec z(2 * d_);
  z.head(d_) = s.m;
  z.tail(d_) = s.x;
  const Vec out = mean_op_ * z + cov_sqrt_ * gauss;
  State r;
  r.m = out.head(d_);
  r.x = out.tail(d_);
  return r;
}

State exact_ou_step(const State& s, double dt, const ModelParams& p,
                    double quad_scale, const Vec& gauss,
                    std::int64_t step_index) {
  const OuTransition tr(static_cast<int>(s.m.size()), p.gamma, p.beta,
                        quad_scale, dt);
  State out = tr.apply(s, gauss);
  if (!out.finite())
    throw BlowupError("exact transition produced a non-finite state",
                      step_index);
  return out;
}

DistanceTrace coupled_contraction_pair(const State& s1, const State& s2,
                                       double horizon, double delta,
                                       const ModelParams& p,
                                       const Objective& obj,
                                       NoiseStream& stream) {
  if (!(horizon > 0.0)) throw ConfigError("contraction: horizon must be positive");
  if (!(delta > 0.0) || delta > horizon)
    throw ConfigError("contraction: need 0 < delta <= horizon");
  if (!p.friction_ok(obj.constants()))
    throw ConfigError(
        "contraction: friction gamma=" + std::to_string(p.gamma) +
        " is at or below the contraction threshold " +
        std::to_string(ModelParams::friction_threshold(obj.constants())));

  const auto steps =
      static_cast<std::int64_t>(std::ceil(horizon / delta - 1e-9));
  const double sqrt_delta = std::sqrt(delta);
  State a = s1, b = s2;
  auto dist = [](const State& u, const State& v) {
    return std::sqrt((u.m - v.m).squaredNorm() + (u.x - v.x).squaredNorm());
  };
  DistanceTrace tr;
  tr.times.reserve(static_cast<std::size_t>(steps) + 1);
  tr.distances.reserve(static_cast<std::size_t>(steps) + 1);
  tr.times.push_back(0.0);
  tr.distances.push_back(dist(a, b));
  Vec g(obj.dim());
  for (std::int64_t k = 1; k <= steps; ++k) {
    stream.gauss_fill(g.data(), g.size());
    const Vec dB = sqrt_delta * g;
    a = langevin_em_step(a, delta, p, obj, dB, k);
    b = langevin_em_step(b, delta, p, obj, dB, k);
    tr.times.push_back(static_cast<double>(k) * delta);
    tr.distances.push_back(dist(a, b));
  }
  return tr;
}

namespace {

struct RecordPlan {
  std::vector<double> times;        // ascending, unique, snapped to the grid
  std::vector<std::int64_t> steps;  // grid index of each time
  std::int64_t last_step = 0;
};

RecordPlan plan_records(const StepSchedule& sched,
                        const std::vector<double>& requested) {
  RecordPlan plan;
  if (requested.empty()) return plan;
  std::vector<double> sorted = requested;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (double t : sorted)
    if (!std::isfinite(t) || t < 0.0)
      throw ConfigError("evolve: record times must be finite and >= 0");

  std::int64_t n = 0;
  double t_n = 0.0;
  for (double target : sorted) {
    const double tol = 1e-9 * std::max(1.0, std::abs(target));
    while (t_n < target - tol) {
      ++n;
      t_n += sched.eta(n);
    }
    if (std::abs(t_n - target) > tol)
      throw ConfigError("evolve: record time " + std::to_string(target) +
                        " is not on the schedule grid (nearest grid point " +
                        std::to_string(t_n) + ")");
    plan.times.push_back(t_n);
    plan.steps.push_back(n);
  }
  plan.last_step = plan.steps.back();
  return plan;
}

bool below_cap(const State& s) {
  return s.finite() && s.norm() <= kBlowupNorm;
}

}  // namespace

Ensemble EvolveResult::ensemble_at(std::size_t idx) const {
  const Snapshot& s = snapshots.at(idx);
  Ensemble e;
  e.dim = static_cast<int>(s.points.cols());
  e.time_label = s.time;
  e.excluded = blowup_count;
  if (blowup_count == 0) {
    e.points = s.points;
    return e;
  }
  e.points.resize(s.points.rows() - blowup_count, s.points.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.points.rows(); ++i)
    if (frozen_at[static_cast<std::size_t>(i)] < 0)
      e.points.row(r++) = s.points.row(i);
  return e;
}

EvolveResult evolve_ensemble(const Mat& init, SystemKind system,
                             const StepSchedule& sched, const ModelParams& p,
                             const Objective& obj, const GradNoiseModel& noise,
                             std::uint64_t seed,
                             const std::vector<double>& record_times,
                             const EvolveOptions& opts) {
  p.validate();
  noise.validate(obj.constants().qp);
  const int d = obj.dim();
  if (p.d != d)
    throw ConfigError("evolve: params.d must match the objective dimension");
  if (init.cols() != 2 * d)
    throw ConfigError("evolve: init needs 2·dim columns (m then x)");
  if (opts.threads < 1) throw ConfigError("evolve: threads must be >= 1");
  if (system == SystemKind::ExactOU &&
      obj.kind() != ObjectiveKind::QuadraticWell)
    throw UnsupportedObjectiveError(
        "evolve: the exact transition sampler supports only the quadratic "
        "well");

  const RecordPlan plan = plan_records(sched, record_times);
  const Eigen::Index n_traj = init.rows();

  EvolveResult res;
  res.frozen_at.assign(static_cast<std::size_t>(n_traj), -1);
  res.snapshots.resize(plan.times.size());
  for (std::size_t r = 0; r < plan.times.size(); ++r) {
    res.snapshots[r].time = plan.times[r];
    res.snapshots[r].step_index = plan.steps[r];
    res.snapshots[r].points.resize(n_traj, 2 * d);
  }
  if (plan.times.empty() || n_traj == 0) return res;

  double em_target = opts.em_substep;
  if (system == SystemKind::LangevinEM && em_target <= 0.0) {
    double eta_min = std::numeric_limits<double>::infinity();
    for (std::int64_t j = 1; j <= plan.last_step; ++j)
      eta_min = std::min(eta_min, sched.eta(j));
    em_target = eta_min / 64.0;
  }

  // One exact transition per inter-record span, shared read-only.
  std::vector<OuTransition> ou_spans;
  if (system == SystemKind::ExactOU) {
    double prev = 0.0;
    ou_spans.reserve(plan.times.size());
    for (double t : plan.times) {
      ou_spans.emplace_back(d, p.gamma, p.beta, obj.scale(), t - prev);
      prev = t;
    }
  }

  const NoiseStream root = NoiseStream(seed, opts.mode);
  const NoiseStream base = root.substream(opts.stream_salt);
  const std::uint64_t system_salt =
      opts.mode == StreamMode::BrownianDerived
          ? 0
          : 1 + static_cast<std::uint64_t>(system);

  auto run_trajectory = [&](Eigen::Index i) -> std::int64_t {
    NoiseStream st =
        base.substream(system_salt).substream(static_cast<std::uint64_t>(i));
    State s;
    s.m = init.row(i).head(d).transpose();
    s.x = init.row(i).tail(d).transpose();
    std::int64_t frozen = -1;
    if (!below_cap(s)) frozen = 0;

    if (system == SystemKind::ExactOU) {
      Vec g(2 * d);
      for (std::size_t seg = 0; seg < ou_spans.size(); ++seg) {
        if (frozen < 0) {
          st.gauss_fill(g.data(), 2 * d);
          const State next = ou_spans[seg].apply(s, g);
          if (below_cap(next))
            s = next;
          else
            frozen = plan.steps[seg];
        }
        res.snapshots[seg].points.row(i) << s.m.transpose(), s.x.transpose();
      }
      return frozen;
    }

    std::size_t rec = 0;
    auto record_if_due = [&](std::int64_t j) {
      while (rec < plan.steps.size() && plan.steps[rec] == j) {
        res.snapshots[rec].points.row(i) << s.m.transpose(), s.x.transpose();
        ++rec;
      }
    };
    record_if_due(0);

    Mat batch(d, p.N);
    Vec zeta(d);
    for (std::int64_t j = 1; j <= plan.last_step && rec < plan.steps.size();
         ++j) {
      const double eta = sched.eta(j);
      if (frozen < 0) {
        State next = s;
        bool ok = true;
        try {
          switch (system) {
            case SystemKind::SGDm:
              draw_noise_batch(noise, st, batch);
              st.gauss_fill(zeta.data(), d);
              next = sgdm_step(s, eta, p, obj, noise, zeta, batch, j);
              break;
            case SystemKind::Intermediate: {
              draw_noise_batch(noise, st, batch);
              st.gauss_fill(zeta.data(), d);
              const Vec dB = std::sqrt(eta) * zeta;
              next = intermediate_step(s, eta, p, obj, noise, dB, batch, j);
              break;
            }
            case SystemKind::LangevinEM: {
              const auto n_sub = std::max<std::int64_t>(
                  1, static_cast<std::int64_t>(
                         std::ceil(eta / em_target - 1e-12)));
              const double delta = eta / static_cast<double>(n_sub);
              const double sqrt_delta = std::sqrt(delta);
              for (std::int64_t u = 0; u < n_sub && below_cap(next); ++u) {
                st.gauss_fill(zeta.data(), d);
                next = langevin_em_step(next, delta, p, obj, sqrt_delta * zeta,
                                        j);
              }
              break;
            }
            default:
              break;
          }
        } catch (const BlowupError&) {
          ok = false;
        }
        if (ok && below_cap(next))
          s = next;
        else
          frozen = j;
      }
      record_if_due(j);
    }
    return frozen;
  };

  const int threads = static_cast<int>(
      std::min<Eigen::Index>(opts.threads, n_traj));
  if (threads <= 1) {
    for (Eigen::Index i = 0; i < n_traj; ++i)
      res.frozen_at[static_cast<std::size_t>(i)] = run_trajectory(i);
  } else {
    const Eigen::Index chunk = (n_traj + threads - 1) / threads;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          const Eigen::Index lo = static_cast<Eigen::Index>(t) * chunk;
          const Eigen::Index hi = std::min<Eigen::Index>(lo + chunk, n_traj);
          for (Eigen::Index i = lo; i < hi; ++i)
            res.frozen_at[static_cast<std::size_t>(i)] = run_trajectory(i);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (const std::int64_t f : res.frozen_at)
    if (f >= 0) ++res.blowup_count;
  return res;
}

Mat point_mass_init(Eigen::Index count, const Vec& m0, const Vec& x0) {
  if (m0.size() != x0.size())
    throw ConfigError("init: m0 and x0 must have equal dimension");
  if (count < 0) throw ConfigError("init: count must be >= 0");
  Mat init(count, 2 * m0.size());
  for (Eigen::Index r = 0; r < count; ++r)
    init.row(r) << m0.transpose(), x0.transpose();
  return init;
}

}  // namespace sgdmlab
