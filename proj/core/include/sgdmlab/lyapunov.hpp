#pragma once

#include <string>
#include <vector>

#include "sgdmlab/objective.hpp"
#include "sgdmlab/state.hpp"

namespace sgdmlab {

/// Parameters of the energy functional
///   V(m, x) = f(x) + (γ²/4)(|x + m/γ|² + |m/γ|² − λ|x|²).
///
/// Construction enforces what the value itself needs (0 < λ ≤ 1/4, Å ≥ 0:
/// that keeps V ≥ 0 for nonnegative f). The tighter cap
/// λ ≤ a/(4L + γ²) and the floor Å ≥ K + 2λ(B²/(2L) + A) are what the drift
/// inequality needs; `admissible` checks them and the drift/envelope paths
/// require it.
struct LyapunovParams {
  double lambda = 0.25;
  double ringA = 0.0;

  void validate() const;
  /// Largest admissible λ and smallest admissible Å for (constants, γ):
  /// λ = min{1/4, a/(4L + γ²)}, Å = K + 2λ(B²/(2L) + A).
  static LyapunovParams defaults(const ObjectiveConstants& c, double gamma);
  bool admissible(const ObjectiveConstants& c, double gamma,
                  std::string* why = nullptr) const;
};

/// V(m, x); requires γ > 0. Nonnegative whenever f ≥ 0 and λ ≤ 1/4.
double lyapunov_value(const ModelParams& p, const LyapunovParams& lp,
                      const Objective& obj, const State& s);

/// The generator applied to V with closed-form partials:
///   𝒜V = −⟨∇_m V, γm + ∇f(x)⟩ + ⟨∇_x V, m⟩ + (β²/2)·d,
///   ∇_m V = m + (γ/2)x,  Δ_m V = d,
///   ∇_x V = ∇f(x) + (γ²(1−λ)/2)x + (γ/2)m.
/// No numerical differentiation anywhere.
double generator_v(const ModelParams& p, const LyapunovParams& lp,
                   const Objective& obj, const State& s);

/// (γÅ + dβ²)/2 − (𝒜V + λγV): nonnegative wherever the drift inequality
/// 𝒜V ≤ −λγV + (γÅ + dβ²)/2 holds.
double drift_margin(const ModelParams& p, const LyapunovParams& lp,
                    const Objective& obj, const State& s);

struct PointMarginReport {
  int points = 0;
  double worst_margin = 0.0;
  bool pass = false;
  std::vector<State> violating_points;  // capped at 16 entries
};

/// Samples (m, x) pairs uniformly in balls of `radius` and evaluates
/// drift_margin at each; pass means worst margin ≥ −1e−9. Requires
/// admissible params.
PointMarginReport drift_check(const ModelParams& p, const LyapunovParams& lp,
                              const Objective& obj, int sample_count,
                              double radius, std::uint64_t seed);

/// Verifies the chained dissipation inequalities
///   ⟨x, ∇f(x)⟩ ≥ (a/2)|x|² − K ≥ 2λ(f(x) + γ²|x|²/4) − Å
/// at sampled points; both margins reported, worst over the two.
PointMarginReport dissipativity_check(const Objective& obj,
                                      const LyapunovParams& lp,
                                      const ModelParams& p, int sample_count,
                                      double radius, std::uint64_t seed);

/// Verifies (a/2)|x|² − (K/2)·log 3 ≤ f(x) ≤ L|x|² + B²/(2L) + A at sampled
/// points (B²/(2L) read as 0 when B = 0).
PointMarginReport quadratic_sandwich_check(const Objective& obj,
                                           int sample_count, double radius,
                                           std::uint64_t seed);

/// Unnormalized log-density −(γ/β²)(|m|² + 2f(x)) of the invariant law.
double stationary_log_density(const ModelParams& p, const Objective& obj,
                              const State& s);

/// Exact per-coordinate stationary variances for the quadratic well:
/// Var(m) = β²/(2γ), Var(x) = β²/(2γ·scale). Throws for other objectives.
struct StationaryMoments {
  double var_m = 0.0;
  double var_x = 0.0;
};
StationaryMoments stationary_moments(const ModelParams& p, const Objective& obj);

}  // namespace sgdmlab
