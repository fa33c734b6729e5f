#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sgdmlab/lyapunov.hpp"

namespace sgdmlab {

/// An equally weighted point cloud in phase space: one row per surviving
/// trajectory, `dim` = 2d columns ordered (m_1..m_d, x_1..x_d). Frozen
/// (blown-up) trajectories are excluded from `points`, with the count kept.
struct Ensemble {
  int dim = 0;
  Mat points;  // n × dim
  double time_label = 0.0;
  std::int64_t excluded = 0;

  Eigen::Index size() const { return points.rows(); }
  int half_dim() const { return dim / 2; }
};

/// Exact empirical 1-Wasserstein distance between equal-size scalar samples:
/// mean absolute difference of order statistics. Inputs are copied and
/// sorted here. Throws on size mismatch or empty input.
double w1_1d(std::vector<double> a, std::vector<double> b);

/// Exact empirical W1 between equal-size clouds (rows = points) via optimal
/// assignment with Euclidean costs, O(n³); n ≤ 512. The cost of the optimal
/// matching is re-summed in row order so equal matchings cost bitwise the
/// same as a brute-force evaluation.
double w1_exact_small(const Mat& a, const Mat& b);

/// Sliced W1: average over n_proj uniformly random unit directions of the
/// 1-D distance between projections. Deterministic given seed; always a
/// lower bound for the exact W1 (projections are 1-Lipschitz), and equal to
/// it in one dimension.
double w1_sliced(const Mat& a, const Mat& b, int n_proj, std::uint64_t seed);

/// Per-axis [lo, hi] box spanning mean ± nsig sample standard deviations of
/// `a` (k × 2 matrix).
Mat sample_range_box(const Mat& a, double nsig = 5.0);

/// Histogram total-variation estimate between equal-dimension samples with
/// k ≤ 2 columns: half the L1 distance of cell frequencies over a
/// bins-per-axis grid on `range_box` (k × 2) plus one overflow cell.
double tv_histogram(const Mat& a, const Mat& b, int bins_per_axis,
                    const Mat& range_box);

enum class Functional { NormM, NormX, LyapunovV };

/// Context needed to evaluate the LyapunovV functional on ensemble rows.
struct VContext {
  ModelParams params;
  LyapunovParams lp;
  const Objective* obj = nullptr;
};

/// Ensemble average of the functional's p-th power: |m|^{2p}, |x|^{2p}, or
/// V(m,x)^p. LyapunovV requires `ctx`. Throws on an empty ensemble.
double empirical_moment(const Ensemble& e, double p, Functional f,
                        const VContext* ctx = nullptr);

/// Least-squares fit of log(distance) against log(η) over ≥ 3 positive
/// pairs; slope is the empirical rate order.
struct RateFit {
  std::vector<std::pair<double, double>> pairs;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs);

}  // namespace sgdmlab
