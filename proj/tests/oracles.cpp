#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
               double h) {
  const Eigen::Index n = x.size();
  Mat H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h;
      xpp[j] += h;
      xpm[i] += h;
      xpm[j] -= h;
      xmp[i] -= h;
      xmp[j] += h;
      xmm[i] -= h;
      xmm[j] -= h;
      H(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
    }
  }
  return H;
}

double fd_generator_v(const sgdmlab::ModelParams& p,
                      const sgdmlab::LyapunovParams& lp,
                      const sgdmlab::Objective& obj, const sgdmlab::State& s,
                      double h) {
  auto v_of_m = [&](const Vec& m) {
    sgdmlab::State t{m, s.x};
    return sgdmlab::lyapunov_value(p, lp, obj, t);
  };
  auto v_of_x = [&](const Vec& x) {
    sgdmlab::State t{s.m, x};
    return sgdmlab::lyapunov_value(p, lp, obj, t);
  };
  const Vec gm = fd_gradient(v_of_m, s.m, h);
  const Vec gx = fd_gradient(v_of_x, s.x, h);

  const double v0 = v_of_m(s.m);
  double lap = 0.0;
  const double h2 = 1e-4;  // second differences want a larger step
  for (Eigen::Index i = 0; i < s.m.size(); ++i) {
    Vec mp = s.m, mm = s.m;
    mp[i] += h2;
    mm[i] -= h2;
    lap += (v_of_m(mp) + v_of_m(mm) - 2.0 * v0) / (h2 * h2);
  }

  const Vec drift_m = p.gamma * s.m + obj.grad(s.x);
  return -gm.dot(drift_m) + gx.dot(s.m) + 0.5 * p.beta * p.beta * lap;
}

double w1_bruteforce(const Mat& a, const Mat& b) {
  const Eigen::Index n = a.rows();
  if (n != b.rows() || a.cols() != b.cols() || n == 0) {
    throw std::invalid_argument("w1_bruteforce: clouds must match and be nonempty");
  }
  if (n > 8) throw std::invalid_argument("w1_bruteforce: n <= 8 only");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      cost += (a.row(i) - b.row(perm[static_cast<std::size_t>(i)])).norm();
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  double total = 0.0;  // re-sum in row order, same accumulation as the library
  for (Eigen::Index i = 0; i < n; ++i) {
    total += (a.row(i) - b.row(best[static_cast<std::size_t>(i)])).norm();
  }
  return total / static_cast<double>(n);
}

OuBlockOracle ou_block_oracle(double gamma, double s, double beta, double t,
                              int simpson_intervals) {
  const double disc = gamma * gamma - 4.0 * s;
  if (!(disc > 0.0)) {
    throw std::invalid_argument("ou_block_oracle: needs gamma^2 > 4s for a real "
                                "eigendecomposition");
  }
  const double root = std::sqrt(disc);
  const double lp = (-gamma + root) / 2.0;  // slow mode
  const double lm = (-gamma - root) / 2.0;  // fast mode

  // D = [[-gamma, -s], [1, 0]] = P diag(lp, lm) P^{-1}, eigenvectors (λ, 1).
  Mat P(2, 2), Pinv(2, 2);
  P << lp, lm, 1.0, 1.0;
  Pinv << 1.0, -lm, -1.0, lp;
  Pinv /= (lp - lm);

  auto expm_at = [&](double u) {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = std::exp(lp * u);
    d(1, 1) = std::exp(lm * u);
    return Mat(P * d * Pinv);
  };

  OuBlockOracle out;
  out.expm = expm_at(t);

  Mat B = Mat::Zero(2, 2);
  B(0, 0) = beta * beta;
  auto integrand = [&](double u) {
    const Mat e = expm_at(u);
    return Mat(e * B * e.transpose());
  };

  if (simpson_intervals % 2 != 0) ++simpson_intervals;
  const double h = t / simpson_intervals;
  Mat acc = integrand(0.0) + integrand(t);
  for (int k = 1; k < simpson_intervals; ++k) {
    acc += (k % 2 == 1 ? 4.0 : 2.0) * integrand(k * h);
  }
  out.cov = (h / 3.0) * acc;
  if (t == 0.0) out.cov = Mat::Zero(2, 2);
  return out;
}

}  // namespace oracle
