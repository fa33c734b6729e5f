// Independent reference computations the test suites compare the library
// against. Everything here is deliberately implemented by a different method
// than the code under test: finite differences instead of closed forms,
// permutation search instead of assignment solving, eigendecomposition plus
// Simpson quadrature instead of the augmented-exponential construction.
#pragma once

#include <functional>

#include "sgdmlab/dynamics.hpp"
#include "sgdmlab/lyapunov.hpp"
#include "sgdmlab/objective.hpp"

namespace oracle {

using sgdmlab::Mat;
using sgdmlab::Vec;

/// Central-difference gradient of a scalar field.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                double h = 1e-6);

/// Central second-difference Hessian.
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
               double h = 1e-4);

/// The diffusion generator applied to the energy V at (m, x), assembled from
/// finite-difference partials of the scalar V only:
///   −⟨∂_m V, γm + ∇f(x)⟩ + ⟨∂_x V, m⟩ + (β²/2)·Δ_m V.
double fd_generator_v(const sgdmlab::ModelParams& p,
                      const sgdmlab::LyapunovParams& lp,
                      const sgdmlab::Objective& obj, const sgdmlab::State& s,
                      double h = 1e-5);

/// Exact empirical W1 between equal-size clouds by exhaustive permutation
/// search; n ≤ 8. The optimal matching cost is summed in ascending row order
/// so that an equal matching reproduces the library's value bitwise.
double w1_bruteforce(const Mat& a, const Mat& b);

/// Per-coordinate Ornstein–Uhlenbeck block (momentum, position) with drift
/// [[−γ, −s], [1, 0]] and noise β on the momentum only, over a time span t:
/// the exact transition operator e^{Dt} from a real eigendecomposition
/// (requires γ² > 4s) and the transition covariance by composite Simpson
/// quadrature of e^{Du}·diag(β², 0)·e^{Dᵀu}.
struct OuBlockOracle {
  Mat expm;  // 2×2, ordered (m, x)
  Mat cov;   // 2×2
};
OuBlockOracle ou_block_oracle(double gamma, double s, double beta, double t,
                              int simpson_intervals = 4000);

}  // namespace oracle
