#include "sgdmlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace sgdmlab {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NoiseStream::NoiseStream(std::uint64_t seed, StreamMode mode)
    : eng_(mix64(seed)), seed_(seed), mode_(mode) {}

NoiseStream NoiseStream::substream(std::uint64_t index) const {
  // Child seed mixes parent seed and index through two finalizer rounds so
  // that (seed, i) and (seed', i') collide only by 64-bit accident.
  return NoiseStream(mix64(seed_ ^ mix64(index ^ 0xa3c59ac2f0136245ULL)), mode_);
}

std::uint64_t NoiseStream::next_word() {
  ++words_;
  return eng_();
}

double NoiseStream::uniform() {
  // Top 53 bits; zero mapped up so log() below stays finite.
  const std::uint64_t bits = next_word() >> 11;
  return (bits == 0 ? 1.0 : static_cast<double>(bits)) * 0x1.0p-53;
}

double NoiseStream::gauss() {
  double pair[2];
  gauss_fill(pair, 2);
  return pair[0];
}

void NoiseStream::gauss_fill(double* out, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; i += 2) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    out[i] = r * std::cos(phi);
    if (i + 1 < n) out[i + 1] = r * std::sin(phi);
  }
}

Vec NoiseStream::gauss_vec(Eigen::Index n) {
  Vec v(n);
  gauss_fill(v.data(), n);
  return v;
}

double NoiseStream::gamma_draw(double alpha) {
  // Marsaglia–Tsang squeeze; alpha >= 1 is all this stream ever needs.
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = gauss();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void NoiseStream::student_t_fill(double* out, Eigen::Index n, double dof) {
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = gauss();
    const double chi2 = 2.0 * gamma_draw(0.5 * dof);  // chi-square_dof
    out[i] = z / std::sqrt(chi2 / dof);
  }
}

}  // namespace sgdmlab
