#pragma once

#include <cstdint>
#include <string>

#include "sgdmlab/common.hpp"

namespace sgdmlab {

enum class ScheduleKind { Constant, Polynomial };

/// Result of scanning the two step-size conditions
///   η_k ≤ (2θ − ω)/(2θ²)   and   η_{k−1} − η_k ≤ ω·η_k²
/// over 1 ≤ k ≤ k_max (η_0 := η_1, so the k = 1 increment is zero).
struct ScheduleCheckReport {
  bool pass = false;                  // no violations in [start_index, k_max]
  std::int64_t start_index = 1;       // max(1, burn_in) actually used
  std::int64_t k_max = 0;
  std::int64_t first_violation_k = 0; // 0 when clean over the scanned range
  std::string violated;               // "step_cap" or "step_increment"
  /// Smallest n₀ with no violations anywhere in [n₀, k_max]; k_max + 1 when
  /// even the last index fails. Decaying schedules satisfy both conditions
  /// eventually, so this reports which regime a configuration is in.
  std::int64_t smallest_valid_start = 1;
};

/// Exact weighted sum S = Σ_{k=1}^n η_k^{1+ε} e^{−θ(t_n − t_k)} next to its
/// closed-form ceiling 4·η_n^ε / (2θ − (4ε−1)ω); callers assert sum ≤ bound.
struct WeightedSumResult {
  double sum = 0.0;
  double bound = 0.0;
};

/// Step-size sequence η_k with cumulative times t_n = Σ_{j≤n} η_j, the decay
/// parameters (ω, θ) of the step conditions above, and a burn-in index from
/// which those conditions are enforced.
///
/// Kinds: Constant(η) and Polynomial(η, α) with η_k = η/k^α, α ∈ (0, 1) so
/// that t_n → ∞.
class StepSchedule {
public:
  static StepSchedule constant(double eta, double omega, double theta,
                               std::int64_t burn_in = 1);
  static StepSchedule polynomial(double eta, double alpha, double omega,
                                 double theta, std::int64_t burn_in = 1);

  /// η_k, k ≥ 1.
  double eta(std::int64_t k) const;

  /// t_n by direct summation; t_0 = 0. O(n).
  double cumulative_time(std::int64_t n) const;

  /// Largest n with t_n ≤ horizon + tiny slack (so a horizon sitting exactly
  /// on the grid maps to its index).
  std::int64_t steps_for_horizon(double horizon) const;

  ScheduleKind kind() const { return kind_; }
  double eta0() const { return eta_; }
  double alpha() const { return alpha_; }
  double omega() const { return omega_; }
  double theta() const { return theta_; }
  std::int64_t burn_in() const { return burn_in_; }

private:
  StepSchedule() = default;

  ScheduleKind kind_ = ScheduleKind::Constant;
  double eta_ = 0.1;
  double alpha_ = 0.0;
  double omega_ = 0.1;
  double theta_ = 1.0;
  std::int64_t burn_in_ = 1;
};

/// Scans both step conditions up to k_max. Throws ConfigError unless
/// ω ∈ (0, 2θ).
ScheduleCheckReport check_step_conditions(const StepSchedule& s, std::int64_t k_max);

/// The weighted sum and its ceiling for ε ∈ [0, 1/2] and a given θ (ω comes
/// from the schedule). Throws ConfigError for ε outside [0, 1/2] or
/// ω ∉ (0, 2θ).
WeightedSumResult exp_weighted_step_sum(const StepSchedule& s, std::int64_t n,
                                        double eps, double theta);

}  // namespace sgdmlab
