#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgdmlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// State norm beyond which a trajectory is frozen and flagged instead of
/// propagating inf/nan through ensemble statistics.
inline constexpr double kBlowupNorm = 1e12;

/// Raised when a single-trajectory stepper is asked to continue from a
/// non-finite or frozen state. Ensemble drivers catch-and-flag instead.
class BlowupError : public std::runtime_error {
public:
  BlowupError(const std::string& what, std::int64_t step)
      : std::runtime_error(what), step_index(step) {}
  std::int64_t step_index;
};

/// A config that cannot be run: bad block, violated precondition, bad ladder.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An operation that needs a specific objective family was given another
/// (the closed-form Gaussian transition exists only for the quadratic well).
class UnsupportedObjectiveError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

}  // namespace sgdmlab
