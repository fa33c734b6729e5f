#include "sgdmlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdmlab/rng.hpp"

namespace sgdmlab {
namespace {

using nlohmann::json;

// Stream salts: the signal system, the reference system, and the two extra
// same-law reference draws whose mutual distance is the reported noise floor.
constexpr std::uint64_t kSaltSignal = 1;
constexpr std::uint64_t kSaltReference = 2;
constexpr std::uint64_t kSaltFloorA = 3;
constexpr std::uint64_t kSaltFloorB = 4;
constexpr std::uint64_t kSaltBatchAlt = 5;

const char kDistanceHeader[] = "time,eta_n,estimator,value,noise_floor,n_samples,seed";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void push_distance_row(ExperimentResult* r, double time, double eta,
                       const std::string& estimator, double value, double floor,
                       std::int64_t n_samples, std::uint64_t seed) {
  r->csv_rows.push_back(fmt17(time) + "," + fmt17(eta) + "," + estimator + "," +
                        fmt17(value) + "," + fmt17(floor) + "," +
                        std::to_string(n_samples) + "," + std::to_string(seed));
}

void add_metric(ExperimentResult* r, const std::string& name, double v) {
  r->metrics.emplace_back(name, v);
}

void add_verdict(ExperimentResult* r, const std::string& name, bool pass,
                 double observed, const std::string& expected,
                 const std::string& note = "") {
  r->verdicts.push_back(Verdict{name, pass, observed, expected, note});
}

/// all_pass = every verdict passed and the run was not invalidated.
void finalize(ExperimentResult* r) {
  bool all = (r->status != "invalid") && !r->verdicts.empty();
  for (const auto& v : r->verdicts) all = all && v.pass;
  r->all_pass = all;
}

/// Flags the whole run invalid when more than 1% of the evolved trajectories
/// blew up; distances over a censored ensemble are not trustworthy.
void check_blowup_budget(ExperimentResult* r) {
  if (r->trajectories > 0 && r->blowup_count * 100 > r->trajectories) {
    r->status = "invalid";
    r->notes.push_back("more than 1% of trajectories exceeded the norm cap; "
                       "results are not interpretable");
  }
}

/// β = 0 with zero gradient-noise scale makes every system follow the same
/// deterministic law: distance experiments then measure pure floor, and the
/// friction precondition is waived because nothing needs to contract.
bool degenerate_noise_free(const ModelParams& p, const GradNoiseModel& nm) {
  return p.beta == 0.0 && nm.scale == 0.0;
}

void require_friction(const char* what, const ModelParams& p,
                      const Objective& obj) {
  if (!p.friction_ok(obj.constants())) {
    throw ConfigError(std::string(what) + ": friction gamma=" + fmtg(p.gamma) +
                      " must exceed sqrt(2)(2L+a)/sqrt(a)=" +
                      fmtg(ModelParams::friction_threshold(obj.constants())));
  }
}

std::vector<double> ladder_desc(std::vector<double> lad, std::size_t min_count,
                                const char* what) {
  if (lad.size() < min_count) {
    throw ConfigError(std::string(what) + ": eta ladder needs at least " +
                      std::to_string(min_count) + " entries");
  }
  for (double e : lad) {
    if (!std::isfinite(e) || !(e > 0.0)) {
      throw ConfigError(std::string(what) + ": eta ladder entries must be positive");
    }
  }
  std::sort(lad.begin(), lad.end(), std::greater<double>());
  if (std::adjacent_find(lad.begin(), lad.end()) != lad.end()) {
    throw ConfigError(std::string(what) + ": eta ladder entries must be distinct");
  }
  return lad;
}

SystemKind system_from_name(const std::string& name) {
  if (name == "SGDm") return SystemKind::SGDm;
  if (name == "Intermediate") return SystemKind::Intermediate;
  if (name == "LangevinEM") return SystemKind::LangevinEM;
  if (name == "ExactOU") return SystemKind::ExactOU;
  throw ConfigError("run.system: unknown system '" + name + "'");
}

StreamMode mode_from_name(const std::string& name) {
  if (name == "independent") return StreamMode::IndependentNormals;
  if (name == "brownian") return StreamMode::BrownianDerived;
  throw ConfigError("run.stream_mode: unknown mode '" + name + "'");
}

/// The comparison target: the closed-form Gaussian law when it exists,
/// otherwise a fine Euler–Maruyama discretization of the same diffusion.
SystemKind reference_system(const Objective& obj) {
  return obj.kind() == ObjectiveKind::QuadraticWell ? SystemKind::ExactOU
                                                    : SystemKind::LangevinEM;
}

/// Truncate both clouds to their common row count (censoring can drop rows).
void equalize_rows(Mat* a, Mat* b) {
  const Eigen::Index n = std::min(a->rows(), b->rows());
  if (a->rows() != n) *a = a->topRows(n).eval();
  if (b->rows() != n) *b = b->topRows(n).eval();
}

struct FourEnsembles {
  Ensemble signal, reference, floor_a, floor_b;
};

Ensemble evolve_final(const Mat& init, SystemKind sys, const StepSchedule& sched,
                      const ModelParams& p, const Objective& obj,
                      const GradNoiseModel& nm, std::uint64_t seed,
                      double record_t, std::uint64_t salt, double em_substep,
                      int threads, ExperimentResult* r) {
  EvolveOptions o;
  o.threads = threads;
  o.stream_salt = salt;
  o.em_substep = em_substep;
  EvolveResult res =
      evolve_ensemble(init, sys, sched, p, obj, nm, seed, {record_t}, o);
  r->blowup_count += res.blowup_count;
  r->trajectories += init.rows();
  return res.ensemble_at(0);
}

/// Signal system + reference + two independent reference draws (the floor
/// pair), all started from the same cloud and read at the same time.
FourEnsembles run_four(const Mat& init, SystemKind sig_sys,
                       const StepSchedule& sched, const ModelParams& p,
                       const Objective& obj, const GradNoiseModel& nm,
                       std::uint64_t seed, double record_t, double ref_substep,
                       int threads, ExperimentResult* r) {
  const SystemKind ref_sys = reference_system(obj);
  FourEnsembles out;
  out.signal = evolve_final(init, sig_sys, sched, p, obj, nm, seed, record_t,
                            kSaltSignal, 0.0, threads, r);
  out.reference = evolve_final(init, ref_sys, sched, p, obj, nm, seed, record_t,
                               kSaltReference, ref_substep, threads, r);
  out.floor_a = evolve_final(init, ref_sys, sched, p, obj, nm, seed, record_t,
                             kSaltFloorA, ref_substep, threads, r);
  out.floor_b = evolve_final(init, ref_sys, sched, p, obj, nm, seed, record_t,
                             kSaltFloorB, ref_substep, threads, r);
  equalize_rows(&out.signal.points, &out.reference.points);
  equalize_rows(&out.floor_a.points, &out.floor_b.points);
  return out;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  bool ok = false;
};

/// Plain least squares of y against x (used for log-distance vs time).
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit f;
  const std::size_t n = xs.size();
  if (n < 3 || ys.size() != n) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ys[i] - (f.intercept + f.slope * xs[i]);
      ss_res += e * e;
    }
    f.r2 = std::max(0.0, 1.0 - ss_res / syy);
  } else {
    f.r2 = 1.0;
  }
  f.ok = true;
  return f;
}

std::uint64_t projection_seed(const ExperimentConfig& cfg) {
  return mix64(cfg.run.seed ^ 0x9e3779b97f4a7c15ULL);
}

json verdicts_json(const ExperimentResult& r) {
  json arr = json::array();
  for (const auto& v : r.verdicts) {
    arr.push_back(json{{"name", v.name},
                       {"pass", v.pass},
                       {"observed", v.observed},
                       {"expected", v.expected},
                       {"note", v.note}});
  }
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

ExperimentResult run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::Simulate;

  const Objective obj = build_objective(cfg);
  const GradNoiseModel nm = build_noise(cfg);
  const ModelParams p = build_params(cfg);
  const StepSchedule sched = build_schedule(cfg);
  const State start = build_start(cfg);
  const int d = obj.dim();

  const SystemKind sys = system_from_name(cfg.run.system);
  EvolveOptions o;
  o.threads = cfg.run.threads;
  o.stream_salt = kSaltSignal;
  o.mode = mode_from_name(cfg.run.stream_mode);

  std::vector<double> records = cfg.run.record;
  if (records.empty()) {
    const std::int64_t n = sched.steps_for_horizon(cfg.run.horizon);
    if (n < 1) throw ConfigError("simulate: horizon is shorter than one step");
    records.push_back(sched.cumulative_time(n));
  }

  const Mat init = point_mass_init(cfg.run.trajectories, start.m, start.x);
  EvolveResult res =
      evolve_ensemble(init, sys, sched, p, obj, nm, cfg.run.seed, records, o);
  r.blowup_count = res.blowup_count;
  r.trajectories = cfg.run.trajectories;

  std::string header = "time,trajectory_id";
  for (int i = 1; i <= d; ++i) header += ",m_" + std::to_string(i);
  for (int i = 1; i <= d; ++i) header += ",x_" + std::to_string(i);
  r.csv_header = header;
  for (const Snapshot& snap : res.snapshots) {
    for (Eigen::Index i = 0; i < snap.points.rows(); ++i) {
      std::string row = fmt17(snap.time) + "," + std::to_string(i);
      for (Eigen::Index c = 0; c < snap.points.cols(); ++c) {
        row += "," + fmt17(snap.points(i, c));
      }
      r.csv_rows.push_back(std::move(row));
    }
  }

  check_blowup_budget(&r);
  const double frac =
      r.trajectories > 0
          ? static_cast<double>(r.blowup_count) / static_cast<double>(r.trajectories)
          : 0.0;
  add_verdict(&r, "blowup_fraction_le_1pct", r.blowup_count * 100 <= r.trajectories,
              frac, "<= 0.01");
  add_metric(&r, "blowup_count", static_cast<double>(r.blowup_count));
  add_metric(&r, "final_time", records.back());
  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// rate-w1
// ---------------------------------------------------------------------------

ExperimentResult run_rate_w1(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::RateW1;
  r.csv_header = kDistanceHeader;

  const Objective obj = build_objective(cfg);
  const GradNoiseModel nm = build_noise(cfg);
  const ModelParams p = build_params(cfg);
  const State start = build_start(cfg);
  const int d = obj.dim();

  const std::vector<double> ladder =
      ladder_desc(cfg.rate_w1.eta_ladder, 3, "rate-w1");
  const bool degenerate = degenerate_noise_free(p, nm);
  if (!degenerate) require_friction("rate-w1", p, obj);

  const double ref_substep = ladder.back() / 64.0;
  const std::uint64_t pseed = projection_seed(cfg);
  const Mat init = point_mass_init(cfg.run.trajectories, start.m, start.x);

  std::vector<std::pair<double, double>> pairs;
  double top_value = 0.0, top_floor = 0.0, top_eta = 0.0, top_time = 0.0;
  Ensemble top_reference, top_floor_a, top_floor_b;

  for (std::size_t li = 0; li < ladder.size(); ++li) {
    const double eta = ladder[li];
    const StepSchedule sched = build_schedule_with_eta(cfg, eta);
    const std::int64_t n = sched.steps_for_horizon(cfg.run.horizon);
    if (n < 1) throw ConfigError("rate-w1: horizon is shorter than one step");
    const double t_n = sched.cumulative_time(n);

    FourEnsembles four = run_four(init, SystemKind::SGDm, sched, p, obj, nm,
                                  cfg.run.seed, t_n, ref_substep,
                                  cfg.run.threads, &r);
    const std::int64_t used = four.signal.size();
    const double w = w1_sliced(four.signal.points, four.reference.points,
                               cfg.rate_w1.n_proj, pseed);
    const double fl = w1_sliced(four.floor_a.points, four.floor_b.points,
                                cfg.rate_w1.n_proj, pseed);
    const double w_m =
        w1_sliced(four.signal.points.leftCols(d), four.reference.points.leftCols(d),
                  cfg.rate_w1.n_proj, pseed);
    const double fl_m =
        w1_sliced(four.floor_a.points.leftCols(d), four.floor_b.points.leftCols(d),
                  cfg.rate_w1.n_proj, pseed);
    const double w_x =
        w1_sliced(four.signal.points.rightCols(d), four.reference.points.rightCols(d),
                  cfg.rate_w1.n_proj, pseed);
    const double fl_x =
        w1_sliced(four.floor_a.points.rightCols(d), four.floor_b.points.rightCols(d),
                  cfg.rate_w1.n_proj, pseed);

    push_distance_row(&r, t_n, eta, "sliced_w1", w, fl, used, cfg.run.seed);
    push_distance_row(&r, t_n, eta, "sliced_w1_m", w_m, fl_m, used, cfg.run.seed);
    push_distance_row(&r, t_n, eta, "sliced_w1_x", w_x, fl_x, used, cfg.run.seed);

    if (li == 0) {
      top_value = w;
      top_floor = fl;
      top_eta = eta;
      top_time = t_n;
      top_reference = four.reference;
      top_floor_a = four.floor_a;
      top_floor_b = four.floor_b;
    }
    if (w - fl > 0.0) pairs.emplace_back(eta, w - fl);
  }

  check_blowup_budget(&r);

  if (degenerate) {
    r.status = "degenerate";
    add_verdict(&r, "degenerate_config", true, top_value,
                "signal indistinguishable from the sampling floor",
                "beta = 0 with zero gradient noise: every system follows the "
                "same deterministic flow, so no rate is fitted");
  } else {
    const double floor_ref = std::max(top_floor, 1e-300);
    add_verdict(&r, "top_signal_above_floor",
                top_value >= cfg.rate_w1.min_top_signal_ratio * top_floor,
                top_value / floor_ref,
                ">= " + fmtg(cfg.rate_w1.min_top_signal_ratio) + "x noise floor");
    if (pairs.size() >= 3) {
      const RateFit fit = rate_fit(pairs);
      add_metric(&r, "slope", fit.slope);
      add_metric(&r, "intercept", fit.intercept);
      add_metric(&r, "r2", fit.r2);
      add_verdict(&r, "slope_in_window",
                  fit.slope >= cfg.rate_w1.slope_min &&
                      fit.slope <= cfg.rate_w1.slope_max,
                  fit.slope,
                  "in [" + fmtg(cfg.rate_w1.slope_min) + ", " +
                      fmtg(cfg.rate_w1.slope_max) + "]");
    } else {
      add_verdict(&r, "slope_in_window", false,
                  std::numeric_limits<double>::quiet_NaN(),
                  "in [" + fmtg(cfg.rate_w1.slope_min) + ", " +
                      fmtg(cfg.rate_w1.slope_max) + "]",
                  "fewer than 3 ladder points rose above the noise floor");
    }
  }

  // Optional batch-size ladder at the top step size, reported without a
  // verdict: the mini-batch term scales like eta^2*sigma^2/N, so its imprint
  // is small next to the injected noise and serves as a diagnostic only.
  if (!cfg.rate_w1.batch_ladder.empty() && top_reference.size() > 0) {
    const StepSchedule sched = build_schedule_with_eta(cfg, top_eta);
    const double fl = w1_sliced(top_floor_a.points, top_floor_b.points,
                                cfg.rate_w1.n_proj, pseed);
    for (int bn : cfg.rate_w1.batch_ladder) {
      if (bn < 1) throw ConfigError("rate-w1: batch ladder entries must be >= 1");
      ModelParams pb = p;
      pb.N = bn;
      Ensemble sig = evolve_final(init, SystemKind::SGDm, sched, pb, obj, nm,
                                  cfg.run.seed, top_time, kSaltSignal, 0.0,
                                  cfg.run.threads, &r);
      Mat a = sig.points, b = top_reference.points;
      equalize_rows(&a, &b);
      const double w = w1_sliced(a, b, cfg.rate_w1.n_proj, pseed);
      push_distance_row(&r, top_time, top_eta, "sliced_w1_N" + std::to_string(bn),
                        w, fl, a.rows(), cfg.run.seed);
    }
    r.notes.push_back("batch ladder rows are diagnostic; no verdict is attached");
  }

  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// rate-tv
// ---------------------------------------------------------------------------

namespace {

/// Joint histogram TV for d = 1 (the 2-D phase vector); for d = 2 the max of
/// the two 2-D marginal TVs. Boxes come from the reference cloud so signal
/// and floor share cells.
struct TvReading {
  double value = 0.0, floor = 0.0;
  double value_m = 0.0, floor_m = 0.0;
  double value_x = 0.0, floor_x = 0.0;
};

TvReading tv_reading(const FourEnsembles& four, int d, int bins, double nsig) {
  TvReading t;
  if (d == 1) {
    const Mat box = sample_range_box(four.reference.points, nsig);
    t.value = tv_histogram(four.signal.points, four.reference.points, bins, box);
    t.floor = tv_histogram(four.floor_a.points, four.floor_b.points, bins, box);
    return t;
  }
  const Mat box_m = sample_range_box(four.reference.points.leftCols(d), nsig);
  const Mat box_x = sample_range_box(four.reference.points.rightCols(d), nsig);
  t.value_m = tv_histogram(four.signal.points.leftCols(d),
                           four.reference.points.leftCols(d), bins, box_m);
  t.value_x = tv_histogram(four.signal.points.rightCols(d),
                           four.reference.points.rightCols(d), bins, box_x);
  t.floor_m = tv_histogram(four.floor_a.points.leftCols(d),
                           four.floor_b.points.leftCols(d), bins, box_m);
  t.floor_x = tv_histogram(four.floor_a.points.rightCols(d),
                           four.floor_b.points.rightCols(d), bins, box_x);
  t.value = std::max(t.value_m, t.value_x);
  t.floor = std::max(t.floor_m, t.floor_x);
  return t;
}

}  // namespace

ExperimentResult run_rate_tv(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::RateTV;
  r.csv_header = kDistanceHeader;

  const Objective obj = build_objective(cfg);
  const GradNoiseModel nm = build_noise(cfg);
  const ModelParams p = build_params(cfg);
  const State start = build_start(cfg);
  const int d = obj.dim();
  if (d > 2) {
    throw ConfigError("rate-tv: histogram TV covers d <= 2 (joint for d = 1, "
                      "per-block marginals for d = 2)");
  }

  const std::vector<double> ladder =
      ladder_desc(cfg.rate_tv.eta_ladder, 2, "rate-tv");
  const double cap = cfg.rate_tv.eta1_cap_c / (static_cast<double>(d) * d);
  if (ladder.front() > cap) {
    throw ConfigError("rate-tv: largest ladder eta " + fmtg(ladder.front()) +
                      " exceeds the cap c/d^2 = " + fmtg(cap));
  }
  const bool degenerate = degenerate_noise_free(p, nm);
  if (!degenerate) require_friction("rate-tv", p, obj);

  const double ref_substep = ladder.back() / 64.0;
  const Mat init = point_mass_init(cfg.run.trajectories, start.m, start.x);
  const int bins = cfg.rate_tv.bins_per_axis;

  std::vector<double> tvs, floors;
  for (double eta : ladder) {
    const StepSchedule sched = build_schedule_with_eta(cfg, eta);
    const std::int64_t n = sched.steps_for_horizon(cfg.run.horizon);
    if (n < 1) throw ConfigError("rate-tv: horizon is shorter than one step");
    const double t_n = sched.cumulative_time(n);

    FourEnsembles four = run_four(init, SystemKind::SGDm, sched, p, obj, nm,
                                  cfg.run.seed, t_n, ref_substep,
                                  cfg.run.threads, &r);
    const TvReading t = tv_reading(four, d, bins, cfg.rate_tv.box_nsig);
    const std::int64_t used = four.signal.size();
    if (d == 2) {
      push_distance_row(&r, t_n, eta, "tv_hist_m", t.value_m, t.floor_m, used,
                        cfg.run.seed);
      push_distance_row(&r, t_n, eta, "tv_hist_x", t.value_x, t.floor_x, used,
                        cfg.run.seed);
    }
    push_distance_row(&r, t_n, eta, "tv_hist", t.value, t.floor, used, cfg.run.seed);
    tvs.push_back(t.value);
    floors.push_back(t.floor);
  }

  check_blowup_budget(&r);

  if (degenerate) {
    r.status = "degenerate";
    add_verdict(&r, "degenerate_config", true, tvs.front(),
                "signal indistinguishable from the sampling floor",
                "beta = 0 with zero gradient noise: no decrease to resolve");
  } else {
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
      add_verdict(&r, "tv_monotone_k" + std::to_string(i + 1),
                  tvs[i + 1] <= tvs[i] + floors[i + 1], tvs[i + 1] - tvs[i],
                  "tv(eta=" + fmtg(ladder[i + 1]) + ") <= tv(eta=" +
                      fmtg(ladder[i]) + ") + floor");
    }

    // Batch-size comparison at fixed eta: growing the mini-batch must not
    // move the chain further from the diffusion (within the floor).
    const double beta_eta = cfg.rate_tv.batch_eta;
    if (!(beta_eta > 0.0) || cfg.rate_tv.batch_lo < 1 ||
        cfg.rate_tv.batch_hi < cfg.rate_tv.batch_lo) {
      throw ConfigError("rate-tv: batch comparison needs batch_eta > 0 and "
                        "1 <= batch_lo <= batch_hi");
    }
    const StepSchedule sched = build_schedule_with_eta(cfg, beta_eta);
    const std::int64_t n = sched.steps_for_horizon(cfg.run.horizon);
    if (n < 1) throw ConfigError("rate-tv: horizon is shorter than one step");
    const double t_n = sched.cumulative_time(n);
    ModelParams p_lo = p, p_hi = p;
    p_lo.N = cfg.rate_tv.batch_lo;
    p_hi.N = cfg.rate_tv.batch_hi;
    FourEnsembles four = run_four(init, SystemKind::SGDm, sched, p_lo, obj, nm,
                                  cfg.run.seed, t_n, ref_substep,
                                  cfg.run.threads, &r);
    Ensemble sig_hi = evolve_final(init, SystemKind::SGDm, sched, p_hi, obj, nm,
                                   cfg.run.seed, t_n, kSaltBatchAlt, 0.0,
                                   cfg.run.threads, &r);
    Mat hi = sig_hi.points, ref = four.reference.points;
    equalize_rows(&hi, &ref);
    FourEnsembles four_hi = four;
    four_hi.signal.points = hi;
    four_hi.reference.points = ref;
    const TvReading t_lo = tv_reading(four, d, bins, cfg.rate_tv.box_nsig);
    const TvReading t_hi = tv_reading(four_hi, d, bins, cfg.rate_tv.box_nsig);
    push_distance_row(&r, t_n, beta_eta,
                      "tv_batch_N" + std::to_string(cfg.rate_tv.batch_lo),
                      t_lo.value, t_lo.floor, four.signal.size(), cfg.run.seed);
    push_distance_row(&r, t_n, beta_eta,
                      "tv_batch_N" + std::to_string(cfg.rate_tv.batch_hi),
                      t_hi.value, t_hi.floor, hi.rows(), cfg.run.seed);
    add_verdict(&r, "tv_batch_decreases", t_hi.value <= t_lo.value + t_lo.floor,
                t_hi.value - t_lo.value,
                "tv(N=" + std::to_string(cfg.rate_tv.batch_hi) + ") <= tv(N=" +
                    std::to_string(cfg.rate_tv.batch_lo) + ") + floor");
  }

  r.notes.push_back("histogram TV verifies step-size and batch-size dependence "
                    "only; the dimension exponent is outside this harness (d <= 2)");
  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// contraction
// ---------------------------------------------------------------------------

ExperimentResult run_contraction(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::Contraction;
  r.csv_header = kDistanceHeader;

  const Objective obj = build_objective(cfg);
  const ModelParams p = build_params(cfg);
  const int d = obj.dim();
  require_friction("contraction", p, obj);

  const State s1 = build_start(cfg);
  State s2;
  if (!cfg.contraction.m0_b.empty() || !cfg.contraction.x0_b.empty()) {
    if (static_cast<int>(cfg.contraction.m0_b.size()) != d ||
        static_cast<int>(cfg.contraction.x0_b.size()) != d) {
      throw ConfigError("contraction: m0_b/x0_b must both have length d");
    }
    s2.m = Eigen::Map<const Vec>(cfg.contraction.m0_b.data(), d);
    s2.x = Eigen::Map<const Vec>(cfg.contraction.x0_b.data(), d);
  } else {
    s2.m = -s1.m;
    s2.x = -s1.x;
  }

  NoiseStream stream =
      NoiseStream(cfg.run.seed, StreamMode::IndependentNormals).substream(0xC07C);
  const DistanceTrace trace = coupled_contraction_pair(
      s1, s2, cfg.run.horizon, cfg.contraction.delta, p, obj, stream);
  r.trajectories = 2;

  double max_dist = 0.0;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    push_distance_row(&r, trace.times[i], cfg.contraction.delta,
                      "coupled_distance", trace.distances[i], 0.0, 2,
                      cfg.run.seed);
    max_dist = std::max(max_dist, trace.distances[i]);
  }

  if (max_dist <= 1e-300) {
    r.status = "degenerate";
    add_verdict(&r, "degenerate_config", true, 0.0,
                "coincident starts keep the coupled distance at zero",
                "no decay rate to fit");
    finalize(&r);
    return r;
  }

  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (!(trace.distances[i] > 0.0)) break;  // fully merged; stop the window
    ts.push_back(trace.times[i]);
    logs.push_back(std::log(trace.distances[i]));
  }
  const LineFit fit = fit_line(ts, logs);
  const double theta_hat = fit.ok ? -fit.slope : 0.0;
  add_metric(&r, "theta_hat", theta_hat);
  add_metric(&r, "r2", fit.r2);

  add_verdict(&r, "theta_positive", fit.ok && theta_hat > 0.0, theta_hat, "> 0");
  add_verdict(&r, "fit_quality", fit.ok && fit.r2 >= cfg.contraction.r2_min,
              fit.r2, ">= " + fmtg(cfg.contraction.r2_min));

  if (obj.kind() == ObjectiveKind::QuadraticWell) {
    const double s = obj.scale();
    const double disc = p.gamma * p.gamma - 4.0 * s;
    if (disc >= 0.0) {
      const double theta_lin = (p.gamma - std::sqrt(disc)) / 2.0;
      add_metric(&r, "theta_linear", theta_lin);
      add_verdict(&r, "theta_matches_linear_rate",
                  std::abs(theta_hat - theta_lin) <=
                      cfg.contraction.eigen_tol_rel * theta_lin,
                  theta_hat,
                  "within " + fmtg(100.0 * cfg.contraction.eigen_tol_rel) +
                      "% of " + fmtg(theta_lin));
    } else {
      r.notes.push_back("gamma^2 < 4*scale: complex drift spectrum, slow-mode "
                        "band not asserted");
    }
  }

  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// drift-check
// ---------------------------------------------------------------------------

ExperimentResult run_drift_check(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::DriftCheck;
  r.csv_header = kDistanceHeader;

  const Objective obj = build_objective(cfg);
  const GradNoiseModel nm = build_noise(cfg);
  const ModelParams p = build_params(cfg);
  const LyapunovParams lp = LyapunovParams::defaults(obj.constants(), p.gamma);
  const int points = cfg.drift.points;
  const double radius = cfg.drift.radius;
  const double tol = cfg.drift.tol;

  const PointMarginReport drift =
      drift_check(p, lp, obj, points, radius, cfg.run.seed);
  const PointMarginReport diss =
      dissipativity_check(obj, lp, p, points, radius, cfg.run.seed + 1);
  const PointMarginReport sandwich =
      quadratic_sandwich_check(obj, points, radius, cfg.run.seed + 2);
  const AssumptionReport ledger =
      verify_assumptions(obj, nm, points, radius, cfg.run.seed + 3);

  add_verdict(&r, "drift_inequality", drift.worst_margin >= -tol,
              drift.worst_margin, ">= -" + fmtg(tol));
  add_verdict(&r, "dissipativity_chain", diss.worst_margin >= -tol,
              diss.worst_margin, ">= -" + fmtg(tol));
  add_verdict(&r, "quadratic_sandwich", sandwich.worst_margin >= -tol,
              sandwich.worst_margin, ">= -" + fmtg(tol));
  double ledger_worst = std::numeric_limits<double>::infinity();
  for (const auto& c : ledger.checks) {
    ledger_worst = std::min(ledger_worst, c.worst_margin);
    push_distance_row(&r, 0.0, 0.0, "ledger_" + c.name, c.worst_margin, 0.0,
                      points, cfg.run.seed);
  }
  add_verdict(&r, "declared_ledger_verified", ledger.all_pass, ledger_worst,
              "every sampled inequality holds");

  push_distance_row(&r, 0.0, 0.0, "drift_margin", drift.worst_margin, 0.0,
                    points, cfg.run.seed);
  push_distance_row(&r, 0.0, 0.0, "dissipativity_margin", diss.worst_margin,
                    0.0, points, cfg.run.seed);
  push_distance_row(&r, 0.0, 0.0, "sandwich_margin", sandwich.worst_margin, 0.0,
                    points, cfg.run.seed);

  add_metric(&r, "lambda", lp.lambda);
  add_metric(&r, "ringA", lp.ringA);
  r.trajectories = 0;

  json report;
  report["points"] = drift.points;
  report["worst_margin"] = drift.worst_margin;
  json viol = json::array();
  for (const State& s : drift.violating_points) {
    json pt = json::array();
    for (Eigen::Index i = 0; i < s.m.size(); ++i) pt.push_back(s.m[i]);
    for (Eigen::Index i = 0; i < s.x.size(); ++i) pt.push_back(s.x[i]);
    viol.push_back(pt);
  }
  report["violating_points"] = viol;
  r.extra_json.emplace_back("drift_report", report.dump());

  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// schedule-check
// ---------------------------------------------------------------------------

ExperimentResult run_schedule_check(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::ScheduleCheck;
  r.csv_header = kDistanceHeader;

  const StepSchedule sched = build_schedule(cfg);
  const std::int64_t k_max = cfg.schedule_check.k_max;
  const ScheduleCheckReport rep = check_step_conditions(sched, k_max);

  std::string note;
  if (!rep.pass) {
    note = "first violation: " + rep.violated + " at k=" +
           std::to_string(rep.first_violation_k);
  }
  note += (note.empty() ? "" : "; ");
  note += "smallest clean start index n0=" + std::to_string(rep.smallest_valid_start);
  add_verdict(&r, "step_conditions_hold", rep.pass,
              static_cast<double>(rep.first_violation_k),
              "no violations in [" + std::to_string(rep.start_index) + ", " +
                  std::to_string(k_max) + "]",
              note);
  add_metric(&r, "smallest_valid_start",
             static_cast<double>(rep.smallest_valid_start));

  if (rep.smallest_valid_start <= 1) {
    for (double eps : cfg.schedule_check.eps_grid) {
      const WeightedSumResult ws =
          exp_weighted_step_sum(sched, k_max, eps, sched.theta());
      add_verdict(&r, "weighted_sum_le_bound_eps_" + fmtg(eps),
                  ws.sum <= ws.bound, ws.sum, "<= " + fmtg(ws.bound));
    }
  } else {
    r.notes.push_back("step conditions hold only from n0=" +
                      std::to_string(rep.smallest_valid_start) +
                      "; the closed-form sum ceiling assumes n0=1 and is not "
                      "asserted");
  }

  double t = 0.0;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double e = sched.eta(k);
    t += e;
    push_distance_row(&r, t, e, "eta", e, 0.0, k, cfg.run.seed);
  }

  r.trajectories = 0;
  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// stationary-check
// ---------------------------------------------------------------------------

ExperimentResult run_stationary_check(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::StationaryCheck;
  r.csv_header = kDistanceHeader;

  const Objective obj = build_objective(cfg);
  if (obj.kind() != ObjectiveKind::QuadraticWell) {
    throw UnsupportedObjectiveError(
        "stationary-check: closed-form invariant moments exist only for the "
        "quadratic well");
  }
  const GradNoiseModel nm = build_noise(cfg);
  const ModelParams p = build_params(cfg);
  if (!(p.gamma > 0.0) || !(p.beta > 0.0)) {
    throw ConfigError("stationary-check: needs gamma > 0 and beta > 0");
  }
  const StepSchedule sched = build_schedule(cfg);
  const std::int64_t n = sched.steps_for_horizon(cfg.run.horizon);
  if (n < 1) throw ConfigError("stationary-check: horizon is shorter than one step");
  const double t_n = sched.cumulative_time(n);
  const State start = build_start(cfg);
  const int d = obj.dim();
  const Mat init = point_mass_init(cfg.run.trajectories, start.m, start.x);

  const Ensemble grid = evolve_final(init, SystemKind::SGDm, sched, p, obj, nm,
                                     cfg.run.seed, t_n, kSaltSignal, 0.0,
                                     cfg.run.threads, &r);
  const Ensemble exact = evolve_final(init, SystemKind::ExactOU, sched, p, obj,
                                      nm, cfg.run.seed, t_n, kSaltReference,
                                      0.0, cfg.run.threads, &r);
  check_blowup_budget(&r);

  const StationaryMoments sm = stationary_moments(p, obj);
  const double dd = static_cast<double>(d);
  const double vm_grid = empirical_moment(grid, 1.0, Functional::NormM) / dd;
  const double vx_grid = empirical_moment(grid, 1.0, Functional::NormX) / dd;
  const double vm_exact = empirical_moment(exact, 1.0, Functional::NormM) / dd;
  const double vx_exact = empirical_moment(exact, 1.0, Functional::NormX) / dd;

  const double tol = cfg.stationary.tol_rel;
  auto within = [&](double got, double want) {
    return std::abs(got - want) <= tol * want;
  };
  add_verdict(&r, "var_m_grid", within(vm_grid, sm.var_m), vm_grid,
              "beta^2/(2*gamma) = " + fmtg(sm.var_m) + " +- " + fmtg(100 * tol) + "%");
  add_verdict(&r, "var_x_grid", within(vx_grid, sm.var_x), vx_grid,
              "beta^2/(2*gamma*scale) = " + fmtg(sm.var_x) + " +- " +
                  fmtg(100 * tol) + "%");
  add_verdict(&r, "var_m_exact", within(vm_exact, sm.var_m), vm_exact,
              "beta^2/(2*gamma) = " + fmtg(sm.var_m) + " +- " + fmtg(100 * tol) + "%");
  add_verdict(&r, "var_x_exact", within(vx_exact, sm.var_x), vx_exact,
              "beta^2/(2*gamma*scale) = " + fmtg(sm.var_x) + " +- " +
                  fmtg(100 * tol) + "%");

  push_distance_row(&r, t_n, sched.eta(n), "var_m_grid", vm_grid, 0.0,
                    grid.size(), cfg.run.seed);
  push_distance_row(&r, t_n, sched.eta(n), "var_x_grid", vx_grid, 0.0,
                    grid.size(), cfg.run.seed);
  push_distance_row(&r, t_n, sched.eta(n), "var_m_exact", vm_exact, 0.0,
                    exact.size(), cfg.run.seed);
  push_distance_row(&r, t_n, sched.eta(n), "var_x_exact", vx_exact, 0.0,
                    exact.size(), cfg.run.seed);

  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// one-step-check
// ---------------------------------------------------------------------------

ExperimentResult run_one_step_check(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::OneStepCheck;
  r.csv_header = kDistanceHeader;

  const Objective obj = build_objective(cfg);
  const GradNoiseModel nm = build_noise(cfg);
  const ModelParams p = build_params(cfg);
  const State start = build_start(cfg);

  const std::vector<double> ladder =
      ladder_desc(cfg.one_step.eta_ladder, 3, "one-step-check");
  const bool degenerate = degenerate_noise_free(p, nm);
  const double ref_substep = ladder.back() / 64.0;
  const std::uint64_t pseed = projection_seed(cfg);
  const Mat init = point_mass_init(cfg.run.trajectories, start.m, start.x);

  std::vector<std::pair<double, double>> pairs;
  for (double eta : ladder) {
    const StepSchedule sched = build_schedule_with_eta(cfg, eta);
    const double t_1 = sched.cumulative_time(1);
    FourEnsembles four = run_four(init, SystemKind::SGDm, sched, p, obj, nm,
                                  cfg.run.seed, t_1, ref_substep,
                                  cfg.run.threads, &r);
    const double w = w1_sliced(four.signal.points, four.reference.points,
                               cfg.one_step.n_proj, pseed);
    const double fl = w1_sliced(four.floor_a.points, four.floor_b.points,
                                cfg.one_step.n_proj, pseed);
    push_distance_row(&r, t_1, eta, "sliced_w1", w, fl, four.signal.size(),
                      cfg.run.seed);
    if (w - fl > 0.0) pairs.emplace_back(eta, w - fl);
  }

  check_blowup_budget(&r);

  if (degenerate) {
    r.status = "degenerate";
    add_verdict(&r, "degenerate_config", true, 0.0,
                "signal indistinguishable from the sampling floor",
                "beta = 0 with zero gradient noise: one step of either system "
                "is the same deterministic map");
  } else if (pairs.size() >= 3) {
    const RateFit fit = rate_fit(pairs);
    add_metric(&r, "slope", fit.slope);
    add_metric(&r, "r2", fit.r2);
    add_verdict(&r, "one_step_slope_in_window",
                fit.slope >= cfg.one_step.slope_min &&
                    fit.slope <= cfg.one_step.slope_max,
                fit.slope,
                "in [" + fmtg(cfg.one_step.slope_min) + ", " +
                    fmtg(cfg.one_step.slope_max) + "]");
  } else {
    add_verdict(&r, "one_step_slope_in_window", false,
                std::numeric_limits<double>::quiet_NaN(),
                "in [" + fmtg(cfg.one_step.slope_min) + ", " +
                    fmtg(cfg.one_step.slope_max) + "]",
                "fewer than 3 ladder points rose above the noise floor");
  }

  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// generalization
// ---------------------------------------------------------------------------

double generalization_floor(const ObjectiveConstants& c, double beta, int d) {
  if (!(beta > 0.0)) {
    throw ConfigError("information floor: beta must be positive");
  }
  if (!(c.L > 0.0) || !(c.a > 0.0) || d < 1) {
    throw ConfigError("information floor: needs L > 0, a > 0, d >= 1");
  }
  const double inner =
      (2.0 * c.a * c.b + c.B * c.B) / (static_cast<double>(d) * c.a * beta * beta) +
      1.0;
  return beta * beta / 4.0 *
         std::log(2.0 * std::numbers::e * c.L / c.a * inner);
}

ExperimentResult run_generalization(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.kind = ExperimentKind::Generalization;
  r.csv_header = kDistanceHeader;

  const Objective obj = build_objective(cfg);
  const GradNoiseModel nm = build_noise(cfg);
  const ModelParams p = build_params(cfg);
  const int d = obj.dim();
  const double J = generalization_floor(obj.constants(), p.beta, d);
  const double threshold = cfg.generalization.risk_factor * J * d;

  const StepSchedule sched = build_schedule(cfg);
  const std::int64_t n = sched.steps_for_horizon(cfg.run.horizon);
  if (n < 1) throw ConfigError("generalization: horizon is shorter than one step");
  const double t_n = sched.cumulative_time(n);
  const State start = build_start(cfg);
  const Mat init = point_mass_init(cfg.run.trajectories, start.m, start.x);

  auto excess_at = [&](const ModelParams& pp, ExperimentResult* rr) {
    const Ensemble e = evolve_final(init, SystemKind::SGDm, sched, pp, obj, nm,
                                    cfg.run.seed, t_n, kSaltSignal, 0.0,
                                    cfg.run.threads, rr);
    double mean_f = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      mean_f += obj.value(e.points.row(i).tail(d).transpose());
    }
    mean_f /= static_cast<double>(std::max<Eigen::Index>(e.size(), 1));
    return std::pair<double, Eigen::Index>(mean_f - obj.min_value(), e.size());
  };

  const auto [excess, used] = excess_at(p, &r);
  check_blowup_budget(&r);

  push_distance_row(&r, t_n, sched.eta(n), "excess_risk", excess, 0.0, used,
                    cfg.run.seed);
  add_metric(&r, "info_floor_J", J);
  add_metric(&r, "risk_threshold", threshold);
  add_metric(&r, "excess_risk", excess);
  add_verdict(&r, "excess_below_info_floor", excess < threshold, excess,
              "< " + fmtg(cfg.generalization.risk_factor) + "*J*d = " +
                  fmtg(threshold));

  for (double b : cfg.generalization.beta_ladder) {
    if (!(b > 0.0)) {
      throw ConfigError("generalization: beta ladder entries must be positive");
    }
    ModelParams pb = p;
    pb.beta = b;
    const auto [eb, ub] = excess_at(pb, &r);
    push_distance_row(&r, t_n, sched.eta(n), "excess_risk_beta_" + fmtg(b), eb,
                      0.0, ub, cfg.run.seed);
  }
  if (!cfg.generalization.beta_ladder.empty()) {
    r.notes.push_back("beta ladder rows are diagnostic; no verdict is attached");
  }

  finalize(&r);
  return r;
}

// ---------------------------------------------------------------------------
// dispatch / envelope / outputs
// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::Simulate: return run_simulate(cfg);
    case ExperimentKind::RateW1: return run_rate_w1(cfg);
    case ExperimentKind::RateTV: return run_rate_tv(cfg);
    case ExperimentKind::Contraction: return run_contraction(cfg);
    case ExperimentKind::DriftCheck: return run_drift_check(cfg);
    case ExperimentKind::ScheduleCheck: return run_schedule_check(cfg);
    case ExperimentKind::StationaryCheck: return run_stationary_check(cfg);
    case ExperimentKind::OneStepCheck: return run_one_step_check(cfg);
    case ExperimentKind::Generalization: return run_generalization(cfg);
  }
  throw ConfigError("unknown experiment kind");
}

EnvelopeCheck moment_envelope_check(
    SystemKind system, const Objective& obj, const GradNoiseModel& noise,
    const ModelParams& p, const LyapunovParams& lp, const StepSchedule& sched,
    Eigen::Index count, const State& start,
    const std::vector<double>& record_times, std::uint64_t calibration_seed,
    const std::vector<std::uint64_t>& fresh_seeds, double rate_factor,
    double margin, int threads) {
  std::string why;
  if (!lp.admissible(obj.constants(), p.gamma, &why)) {
    throw ConfigError("moment envelope: inadmissible energy parameters: " + why);
  }
  if (!(rate_factor > 0.0) || !(margin >= 1.0)) {
    throw ConfigError("moment envelope: needs rate_factor > 0 and margin >= 1");
  }

  EnvelopeCheck out;
  out.rate_factor = rate_factor;
  out.margin = margin;
  out.v0 = lyapunov_value(p, lp, obj, start);
  const double rate = rate_factor * lp.lambda * p.gamma;
  const double dd = static_cast<double>(p.d);
  const VContext ctx{p, lp, &obj};
  const Mat init = point_mass_init(count, start.m, start.x);

  EvolveOptions o;
  o.threads = threads;
  o.stream_salt = kSaltSignal;

  auto values_for = [&](std::uint64_t seed) {
    EvolveResult res = evolve_ensemble(init, system, sched, p, obj, noise, seed,
                                       record_times, o);
    std::vector<double> vals;
    vals.reserve(res.snapshots.size());
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
      vals.push_back(
          empirical_moment(res.ensemble_at(i), 1.0, Functional::LyapunovV, &ctx));
    }
    return vals;
  };

  out.calibration_values = values_for(calibration_seed);
  out.times = record_times;
  std::sort(out.times.begin(), out.times.end());
  out.times.erase(std::unique(out.times.begin(), out.times.end()), out.times.end());
  if (out.times.size() != out.calibration_values.size()) {
    throw ConfigError("moment envelope: record grid must be unique and sorted");
  }

  double c_hat = 1e-12;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double decay = std::exp(-rate * out.times[i]) * out.v0;
    c_hat = std::max(c_hat, (out.calibration_values[i] - decay) / dd);
  }
  out.c_hat = c_hat;

  out.worst_values.assign(out.times.size(), 0.0);
  out.pass = true;
  out.worst_ratio = 0.0;
  for (std::uint64_t seed : fresh_seeds) {
    const std::vector<double> vals = values_for(seed);
    for (std::size_t i = 0; i < out.times.size(); ++i) {
      const double env = std::exp(-rate * out.times[i]) * out.v0 + c_hat * dd;
      out.worst_values[i] = std::max(out.worst_values[i], vals[i]);
      out.worst_ratio = std::max(out.worst_ratio, vals[i] / env);
      if (vals[i] > margin * env) out.pass = false;
    }
  }
  return out;
}

void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string hash = config_hash_hex(cfg);
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";

  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    json old;
    try {
      in >> old;
    } catch (const json::exception&) {
      throw ConfigError("output dir holds an unreadable manifest.json; refusing "
                        "to overwrite " + out_dir);
    }
    const std::string old_hash = old.value("config_hash", std::string());
    if (old_hash != hash) {
      throw ConfigError("output dir already holds results for config hash " +
                        old_hash + "; refusing to overwrite with hash " + hash +
                        " (choose a fresh --out)");
    }
  }

  auto write_file = [&](const fs::path& path, const std::string& text) {
    std::ofstream outf(path, std::ios::trunc);
    outf << text;
    if (!outf.good()) {
      throw std::runtime_error("cannot write " + path.string());
    }
  };

  std::string csv = result.csv_header + "\n";
  for (const auto& row : result.csv_rows) csv += row + "\n";
  write_file(fs::path(out_dir) / "results.csv", csv);

  json verdict;
  verdict["experiment"] = to_string(result.kind);
  verdict["status"] = result.status;
  verdict["all_pass"] = result.all_pass;
  verdict["verdicts"] = verdicts_json(result);
  json metrics = json::object();
  for (const auto& [k, v] : result.metrics) metrics[k] = v;
  verdict["metrics"] = metrics;
  verdict["notes"] = result.notes;
  for (const auto& [key, text] : result.extra_json) {
    verdict[key] = json::parse(text);
  }
  write_file(fs::path(out_dir) / "verdict.json", verdict.dump(2) + "\n");

  json manifest;
  manifest["experiment"] = to_string(result.kind);
  manifest["config_hash"] = hash;
  manifest["seed"] = cfg.run.seed;
  manifest["threads"] = cfg.run.threads;
  manifest["trajectories"] = result.trajectories;
  manifest["blowup_count"] = result.blowup_count;
  manifest["config"] = json::parse(config_to_json_text(cfg));
  write_file(manifest_path, manifest.dump(2) + "\n");
}

}  // namespace sgdmlab
