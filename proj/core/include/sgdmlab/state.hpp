#pragma once

#include <cmath>
#include <limits>

#include "sgdmlab/common.hpp"
#include "sgdmlab/objective.hpp"

namespace sgdmlab {

/// A phase-space point (momentum, position) in R^d × R^d.
struct State {
  Vec m;
  Vec x;

  bool finite() const { return m.allFinite() && x.allFinite(); }
  double norm() const { return std::sqrt(m.squaredNorm() + x.squaredNorm()); }
};

/// Friction γ, temperature β, mini-batch size N, dimension d.
/// γ = 0 or β = 0 are legal for degenerate/transport sanity configurations;
/// the experiments that rely on contraction enforce the friction lower bound
/// below before running.
struct ModelParams {
  double gamma = 5.0;
  double beta = 1.0;
  int N = 1;
  int d = 1;

  void validate() const {
    if (!(gamma >= 0.0)) throw ConfigError("model: gamma must be nonnegative");
    if (!(beta >= 0.0)) throw ConfigError("model: beta must be nonnegative");
    if (N < 1) throw ConfigError("model: N must be >= 1");
    if (d < 1) throw ConfigError("model: d must be >= 1");
  }

  /// √2·(2L + a)/√a — the friction level above which the coupled dynamics
  /// contract; required by the rate and contraction experiments. +∞ when the
  /// ledger has no dissipativity slope (a ≤ 0), so friction_ok is then false.
  static double friction_threshold(const ObjectiveConstants& c) {
    if (!(c.a > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0) * (2.0 * c.L + c.a) / std::sqrt(c.a);
  }
  bool friction_ok(const ObjectiveConstants& c) const {
    return gamma > friction_threshold(c);
  }
};

}  // namespace sgdmlab
