#pragma once

#include <cstdint>
#include <random>

#include "sgdmlab/common.hpp"

namespace sgdmlab {

/// How Brownian increments relate to the discrete noise ζ when two systems
/// share a stream. In BrownianDerived mode a paired SDE stepper consumes
/// ΔB = √η·ζ built from the *same* normals as the discrete recursion, which
/// makes the two grid chains pathwise identical; in IndependentNormals mode
/// each system derives its own substream.
enum class StreamMode { IndependentNormals, BrownianDerived };

/// Seeded, replayable source of uniforms, normals, and Student-t draws.
///
/// Guarantees:
///  - same seed → bit-identical draw sequence on every run;
///  - substream(i) derives an independent child stream (per trajectory),
///    so ensembles are thread-count invariant;
///  - every draw is a pure function of the engine state at call time
///    (no cached spares), so partial replays line up as long as callers
///    request the same shapes in the same order.
///
/// Normals come from Box–Muller on explicit 53-bit uniforms rather than
/// std::normal_distribution, whose algorithm is implementation-defined.
class NoiseStream {
public:
  explicit NoiseStream(std::uint64_t seed,
                       StreamMode mode = StreamMode::IndependentNormals);

  /// Child stream for trajectory/salt `index`; deterministic in (seed, index).
  NoiseStream substream(std::uint64_t index) const;

  /// Uniform on [2^-53, 1), 53 random bits.
  double uniform();

  /// One standard normal (draws a full Box–Muller pair, keeps the cosine leg).
  double gauss();

  /// Fills out[0..n) with iid standard normals.
  void gauss_fill(double* out, Eigen::Index n);
  Vec gauss_vec(Eigen::Index n);

  /// Fills out[0..n) with iid standard Student-t draws (dof > 2).
  /// Each coordinate consumes one normal then a chi-square via
  /// Marsaglia–Tsang, in that order.
  void student_t_fill(double* out, Eigen::Index n, double dof);

  std::uint64_t seed() const { return seed_; }
  StreamMode mode() const { return mode_; }
  /// Count of raw 64-bit engine words consumed; the replay cursor.
  std::uint64_t cursor() const { return words_; }

private:
  std::uint64_t next_word();
  double gamma_draw(double alpha);  // shape >= 1, scale 1

  std::mt19937_64 eng_;
  std::uint64_t seed_;
  std::uint64_t words_ = 0;
  StreamMode mode_;
};

/// SplitMix64 finalizer; used for seed derivation and config hashing.
std::uint64_t mix64(std::uint64_t z);

}  // namespace sgdmlab
