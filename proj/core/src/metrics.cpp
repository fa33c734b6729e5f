#include "sgdmlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgdmlab/rng.hpp"

namespace sgdmlab {

double w1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size())
    throw ConfigError("w1_1d: samples must have equal size");
  if (a.empty()) throw ConfigError("w1_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

namespace {

// Shortest-augmenting-path optimal assignment (Jonker–Volgenant style) with
// dual potentials; exact for real costs. Returns row → column.
std::vector<int> solve_assignment(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, n), way(n + 1, 0);  // p[j] = row matched to col j
  for (int i = 0; i < n; ++i) {
    p[n] = i;
    int j0 = n;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != n);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != n);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 0; j < n; ++j)
    if (p[j] != n) row_to_col[p[j]] = j;
  return row_to_col;
}

}  // namespace

double w1_exact_small(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw ConfigError("w1_exact_small: size mismatch");
  if (a.cols() != b.cols()) throw ConfigError("w1_exact_small: dim mismatch");
  const Eigen::Index n = a.rows();
  if (n < 1) throw ConfigError("w1_exact_small: empty sample");
  if (n > 512)
    throw ConfigError("w1_exact_small: n > 512; use the sliced estimator");

  Mat cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = (a.row(i) - b.row(j)).norm();
  const std::vector<int> match = solve_assignment(cost);
  // Re-sum in row order: a brute-force oracle evaluating the same matching
  // produces the identical floating-point total.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += cost(i, match[static_cast<std::size_t>(i)]);
  return acc / static_cast<double>(n);
}

double w1_sliced(const Mat& a, const Mat& b, int n_proj, std::uint64_t seed) {
  if (a.rows() != b.rows()) throw ConfigError("w1_sliced: size mismatch");
  if (a.cols() != b.cols()) throw ConfigError("w1_sliced: dim mismatch");
  if (a.rows() < 1) throw ConfigError("w1_sliced: empty sample");
  if (n_proj < 1) throw ConfigError("w1_sliced: n_proj must be >= 1");
  const Eigen::Index n = a.rows();
  const Eigen::Index k = a.cols();

  NoiseStream st(seed);
  std::vector<double> pa(static_cast<std::size_t>(n)), pb(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int s = 0; s < n_proj; ++s) {
    Vec dir = st.gauss_vec(k);
    const double norm = dir.norm();
    if (norm == 0.0) {
      --s;  // measure-zero redraw; keeps the direction law uniform
      continue;
    }
    dir /= norm;
    Eigen::Map<Vec>(pa.data(), n) = a * dir;
    Eigen::Map<Vec>(pb.data(), n) = b * dir;
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double d1 = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) d1 += std::abs(pa[i] - pb[i]);
    acc += d1 / static_cast<double>(n);
  }
  return acc / n_proj;
}

Mat sample_range_box(const Mat& a, double nsig) {
  if (a.rows() < 1) throw ConfigError("range box: empty sample");
  Mat box(a.cols(), 2);
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double mean = a.col(c).mean();
    const double var = (a.col(c).array() - mean).square().mean();
    const double half = std::max(nsig * std::sqrt(var), 1e-9);
    box(c, 0) = mean - half;
    box(c, 1) = mean + half;
  }
  return box;
}

double tv_histogram(const Mat& a, const Mat& b, int bins_per_axis,
                    const Mat& range_box) {
  const Eigen::Index k = a.cols();
  if (b.cols() != k) throw ConfigError("tv_histogram: dim mismatch");
  if (k < 1 || k > 2) throw ConfigError("tv_histogram: only 1 or 2 columns supported");
  if (bins_per_axis < 1) throw ConfigError("tv_histogram: bins must be >= 1");
  if (range_box.rows() != k || range_box.cols() != 2)
    throw ConfigError("tv_histogram: range_box must be k x 2");
  for (Eigen::Index c = 0; c < k; ++c)
    if (!(range_box(c, 1) > range_box(c, 0)))
      throw ConfigError("tv_histogram: degenerate range_box");
  if (a.rows() < 1 || b.rows() < 1) throw ConfigError("tv_histogram: empty sample");

  const std::size_t cells =
      static_cast<std::size_t>(std::pow(bins_per_axis, static_cast<int>(k))) + 1;
  const std::size_t overflow = cells - 1;
  std::vector<std::int64_t> ca(cells, 0), cb(cells, 0);

  auto cell_of = [&](const Mat& s, Eigen::Index r) -> std::size_t {
    std::size_t idx = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double lo = range_box(c, 0), hi = range_box(c, 1);
      const double v = s(r, c);
      if (!(v >= lo && v < hi)) return overflow;
      const auto bin = static_cast<std::size_t>((v - lo) / (hi - lo) * bins_per_axis);
      idx = idx * static_cast<std::size_t>(bins_per_axis) +
            std::min(bin, static_cast<std::size_t>(bins_per_axis - 1));
    }
    return idx;
  };

  for (Eigen::Index r = 0; r < a.rows(); ++r) ++ca[cell_of(a, r)];
  for (Eigen::Index r = 0; r < b.rows(); ++r) ++cb[cell_of(b, r)];

  const double na = static_cast<double>(a.rows());
  const double nb = static_cast<double>(b.rows());
  double acc = 0.0;
  for (std::size_t i = 0; i < cells; ++i)
    acc += std::abs(static_cast<double>(ca[i]) / na - static_cast<double>(cb[i]) / nb);
  return 0.5 * acc;
}

double empirical_moment(const Ensemble& e, double p, Functional f,
                        const VContext* ctx) {
  if (e.size() < 1) throw ConfigError("empirical_moment: empty ensemble");
  if (!(p >= 1.0)) throw ConfigError("empirical_moment: p must be >= 1");
  const int d = e.half_dim();
  double acc = 0.0;
  if (f == Functional::LyapunovV) {
    if (ctx == nullptr || ctx->obj == nullptr)
      throw ConfigError("empirical_moment: LyapunovV needs a context");
    State s;
    for (Eigen::Index r = 0; r < e.size(); ++r) {
      s.m = e.points.row(r).head(d).transpose();
      s.x = e.points.row(r).tail(d).transpose();
      acc += std::pow(lyapunov_value(ctx->params, ctx->lp, *ctx->obj, s), p);
    }
  } else {
    for (Eigen::Index r = 0; r < e.size(); ++r) {
      const double sq = (f == Functional::NormM)
                            ? e.points.row(r).head(d).squaredNorm()
                            : e.points.row(r).tail(d).squaredNorm();
      acc += std::pow(sq, p);
    }
  }
  return acc / static_cast<double>(e.size());
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw ConfigError("rate_fit: need at least 3 pairs");
  for (const auto& [eta, dist] : pairs)
    if (!(eta > 0.0 && dist > 0.0))
      throw ConfigError("rate_fit: pairs must be positive for log-log fitting");

  const double n = static_cast<double>(pairs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [eta, dist] : pairs) {
    const double lx = std::log(eta), ly = std::log(dist);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  if (!(vxx > 0.0)) throw ConfigError("rate_fit: degenerate abscissae");

  RateFit fit;
  fit.pairs = pairs;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_res = vyy - fit.slope * vxy;
  fit.r2 = vyy > 0.0 ? std::max(0.0, 1.0 - ss_res / vyy) : 1.0;
  return fit;
}

}  // namespace sgdmlab
