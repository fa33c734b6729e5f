#pragma once

#include <cstdint>
#include <vector>

#include "sgdmlab/metrics.hpp"
#include "sgdmlab/objective.hpp"
#include "sgdmlab/rng.hpp"
#include "sgdmlab/schedule.hpp"
#include "sgdmlab/state.hpp"

namespace sgdmlab {

/// One step of the discrete momentum recursion with step size η:
///   m′ = m − γη·m − η·(∇f(x) + mean of noise batch) + β√η·ζ
///   x′ = x + η·m
/// The position update uses the OLD momentum and the momentum update the OLD
/// position; ζ is standard normal in R^d, the batch holds N realized noise
/// columns. Throws BlowupError (tagged with `step_index`) if the result
/// leaves the finite range.
State sgdm_step(const State& s, double eta, const ModelParams& p,
                const Objective& obj, const GradNoiseModel& noise,
                const Vec& zeta, const Mat& noise_batch,
                std::int64_t step_index = -1);

/// One step of the piecewise-frozen diffusion over a grid cell of length η:
///   m′ = m − γη·m − η·(∇f(x) + mean of noise batch) + β·ΔB
///   x′ = x + η·m
/// with drift coefficients held at the left endpoint and ΔB ~ N(0, η·I).
/// Feeding ΔB = √η·ζ with the same ζ and batch as sgdm_step reproduces its
/// output to within floating-point associativity (≤ 1 ulp per coordinate).
State intermediate_step(const State& s, double eta, const ModelParams& p,
                        const Objective& obj, const GradNoiseModel& noise,
                        const Vec& dB, const Mat& noise_batch,
                        std::int64_t step_index = -1);

/// Euler–Maruyama substep of the underdamped diffusion with substep δ:
///   m′ = m − δ(γm + ∇f(x)) + β·dB,  x′ = x + δ·m,
/// evaluating ∇f at the CURRENT position each substep (no freezing) with
/// dB ~ N(0, δ·I).
State langevin_em_step(const State& s, double delta, const ModelParams& p,
                       const Objective& obj, const Vec& dB,
                       std::int64_t step_index = -1);

/// Exact Gaussian transition of the linear system
///   dm = (−γm − s·x)dt + β dB,   dx = m dt
/// over a span `dt`: z′ = M·z + S·g with M = e^{D·dt},
/// D = [[−γI, −sI], [I, 0]] on stacked (m, x), and S·Sᵀ the Itô covariance
/// ∫₀^dt e^{uD} diag(β²I, 0) e^{uDᵀ} du. Mean and covariance come from one
/// augmented block matrix exponential (scaling-and-squaring Padé); S is the
/// symmetric square root via eigendecomposition. Long spans are split into
/// sub-spans whose transitions are composed — the law is a Gaussian
/// semigroup, so composition is exact while keeping the augmented
/// exponential's dynamic range bounded. dt = 0 yields the identity.
class OuTransition {
public:
  OuTransition(int dim, double gamma, double beta, double quad_scale,
               double dt);

  /// z′ = mean_op·(m; x) + cov_sqrt·gauss, gauss = 2d iid standard normals.
  State apply(const State& s, const Vec& gauss) const;

  const Mat& mean_op() const { return mean_op_; }
  const Mat& cov() const { return cov_; }
  const Mat& cov_sqrt() const { return cov_sqrt_; }
  double dt() const { return dt_; }
  int dim() const { return d_; }

private:
  int d_ = 0;
  double dt_ = 0.0;
  Mat mean_op_, cov_, cov_sqrt_;
};

/// One draw from the exact transition law above, for f(x) = (s/2)|x|²:
/// convenience wrapper constructing the transition each call. `gauss` holds
/// 2d iid standard normals.
State exact_ou_step(const State& s, double dt, const ModelParams& p,
                    double quad_scale, const Vec& gauss,
                    std::int64_t step_index = -1);

/// Phase-space distance √(|Δm|² + |Δx|²) against time.
struct DistanceTrace {
  std::vector<double> times;
  std::vector<double> distances;
};

/// Evolves two diffusion chains from s1 and s2 with IDENTICAL Brownian
/// increments (synchronous coupling) via Euler–Maruyama substeps of length
/// `delta`, recording the phase-space distance after every substep
/// (including t = 0). The noise cancels in the difference, so for the
/// quadratic well the trace is deterministic and decays at the slow
/// eigenvalue rate of the drift matrix. Requires γ above the contraction
/// friction threshold.
DistanceTrace coupled_contraction_pair(const State& s1, const State& s2,
                                       double horizon, double delta,
                                       const ModelParams& p,
                                       const Objective& obj,
                                       NoiseStream& stream);

enum class SystemKind { SGDm, Intermediate, LangevinEM, ExactOU };

struct EvolveOptions {
  int threads = 1;
  /// Target Euler–Maruyama substep for LangevinEM; each grid cell of length
  /// η is split into ⌈η/target⌉ equal substeps. 0 → min grid step / 64.
  double em_substep = 0.0;
  /// Extra salt on the stream tree: ensembles with different salts are
  /// independent even at the same seed (reference clouds, noise floors).
  std::uint64_t stream_salt = 0;
  /// BrownianDerived: all systems share one per-trajectory stream, so a
  /// discrete chain and its frozen-coefficient diffusion consume the same
  /// normals and stay pathwise coupled. IndependentNormals: the stream is
  /// additionally salted by system, decoupling them.
  StreamMode mode = StreamMode::IndependentNormals;
};

/// Ensemble state at one recorded grid time: row i = (m_1..m_d, x_1..x_d) of
/// trajectory i. Frozen trajectories hold their last below-threshold state.
struct Snapshot {
  double time = 0.0;
  std::int64_t step_index = 0;
  Mat points;
};

struct EvolveResult {
  std::vector<Snapshot> snapshots;  // ascending in time
  /// Per-trajectory grid step at which the state blew past the norm cap
  /// (trajectory then frozen at its last good state); −1 if it never did.
  std::vector<std::int64_t> frozen_at;
  std::int64_t blowup_count = 0;

  /// Snapshot `idx` as a metrics cloud, frozen trajectories dropped and
  /// counted in `excluded`.
  Ensemble ensemble_at(std::size_t idx) const;
};

/// Evolves `init.rows()` independent trajectories of the chosen system along
/// the schedule grid t_n, snapshotting at `record_times` (each must sit on
/// the grid; t = 0 is the initial state). Trajectory i draws from
/// substream(i) of a root derived from (seed, stream_salt, mode, system), so
/// results are deterministic and thread-count invariant. Per grid step the
/// draw order is: noise batch (one flat d×N fill), then the d-dimensional
/// normal — identical for the discrete and frozen-coefficient systems, which
/// is what makes shared-stream runs pathwise identical. A trajectory whose
/// state norm exceeds the blowup cap is frozen and flagged, and the ensemble
/// continues.
EvolveResult evolve_ensemble(const Mat& init, SystemKind system,
                             const StepSchedule& sched, const ModelParams& p,
                             const Objective& obj, const GradNoiseModel& noise,
                             std::uint64_t seed,
                             const std::vector<double>& record_times,
                             const EvolveOptions& opts = {});

/// count × 2d matrix with every row (m0, x0).
Mat point_mass_init(Eigen::Index count, const Vec& m0, const Vec& x0);

}  // namespace sgdmlab
