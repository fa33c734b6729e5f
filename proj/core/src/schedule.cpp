#include "sgdmlab/schedule.hpp"

#include <cmath>
#include <vector>

namespace sgdmlab {

StepSchedule StepSchedule::constant(double eta, double omega, double theta,
                                    std::int64_t burn_in) {
  if (!(eta > 0.0)) throw ConfigError("schedule: eta must be positive");
  if (!(omega > 0.0)) throw ConfigError("schedule: omega must be positive");
  if (!(theta > 0.0)) throw ConfigError("schedule: theta must be positive");
  if (burn_in < 0) throw ConfigError("schedule: burn_in must be nonnegative");
  StepSchedule s;
  s.kind_ = ScheduleKind::Constant;
  s.eta_ = eta;
  s.omega_ = omega;
  s.theta_ = theta;
  s.burn_in_ = burn_in;
  return s;
}

StepSchedule StepSchedule::polynomial(double eta, double alpha, double omega,
                                      double theta, std::int64_t burn_in) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("schedule: alpha must lie in (0, 1)");
  StepSchedule s = constant(eta, omega, theta, burn_in);
  s.kind_ = ScheduleKind::Polynomial;
  s.alpha_ = alpha;
  return s;
}

double StepSchedule::eta(std::int64_t k) const {
  if (k < 1) throw ConfigError("schedule: step index must be >= 1");
  if (kind_ == ScheduleKind::Constant) return eta_;
  return eta_ / std::pow(static_cast<double>(k), alpha_);
}

double StepSchedule::cumulative_time(std::int64_t n) const {
  double t = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) t += eta(k);
  return t;
}

std::int64_t StepSchedule::steps_for_horizon(double horizon) const {
  if (horizon <= 0.0) return 0;
  const double slack = 1e-9 * std::max(1.0, horizon);
  double t = 0.0;
  std::int64_t k = 0;
  for (;;) {
    const double next = t + eta(k + 1);
    if (next > horizon + slack) return k;
    t = next;
    ++k;
  }
}

namespace {

void require_omega_theta(double omega, double theta) {
  if (!(omega > 0.0 && omega < 2.0 * theta))
    throw ConfigError("schedule: omega must lie in (0, 2*theta)");
}

}  // namespace

ScheduleCheckReport check_step_conditions(const StepSchedule& s, std::int64_t k_max) {
  require_omega_theta(s.omega(), s.theta());
  if (k_max < 1) throw ConfigError("schedule: k_max must be >= 1");

  const double theta = s.theta();
  const double omega = s.omega();
  const double cap = (2.0 * theta - omega) / (2.0 * theta * theta);

  ScheduleCheckReport rep;
  rep.k_max = k_max;
  rep.start_index = std::max<std::int64_t>(1, s.burn_in());

  std::int64_t last_violation = 0;
  double eta_prev = s.eta(1);  // η_0 := η_1
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double eta_k = s.eta(k);
    const char* bad = nullptr;
    if (eta_k > cap) bad = "step_cap";
    else if (eta_prev - eta_k > omega * eta_k * eta_k) bad = "step_increment";
    if (bad != nullptr) {
      last_violation = k;
      if (k >= rep.start_index && rep.first_violation_k == 0) {
        rep.first_violation_k = k;
        rep.violated = bad;
      }
    }
    eta_prev = eta_k;
  }
  rep.pass = rep.first_violation_k == 0;
  rep.smallest_valid_start = last_violation + 1;
  return rep;
}

WeightedSumResult exp_weighted_step_sum(const StepSchedule& s, std::int64_t n,
                                        double eps, double theta) {
  if (!(eps >= 0.0 && eps <= 0.5))
    throw ConfigError("schedule: eps must lie in [0, 1/2]");
  if (!(theta > 0.0)) throw ConfigError("schedule: theta must be positive");
  require_omega_theta(s.omega(), theta);
  if (n < 1) throw ConfigError("schedule: n must be >= 1");

  std::vector<double> t(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t k = 1; k <= n; ++k)
    t[static_cast<std::size_t>(k)] = t[static_cast<std::size_t>(k - 1)] + s.eta(k);

  const double t_n = t[static_cast<std::size_t>(n)];
  double sum = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double eta_k = s.eta(k);
    sum += std::pow(eta_k, 1.0 + eps) *
           std::exp(-theta * (t_n - t[static_cast<std::size_t>(k)]));
  }

  WeightedSumResult r;
  r.sum = sum;
  r.bound = 4.0 / (2.0 * theta - (4.0 * eps - 1.0) * s.omega()) *
            std::pow(s.eta(n), eps);
  return r;
}

}  // namespace sgdmlab
