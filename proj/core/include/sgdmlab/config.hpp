#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgdmlab/common.hpp"
#include "sgdmlab/objective.hpp"
#include "sgdmlab/schedule.hpp"
#include "sgdmlab/state.hpp"

namespace sgdmlab {

enum class ExperimentKind {
  Simulate,
  RateW1,
  RateTV,
  Contraction,
  DriftCheck,
  ScheduleCheck,
  StationaryCheck,
  OneStepCheck,
  Generalization,
};

/// Canonical name ("RateW1") used in JSON and reports.
std::string to_string(ExperimentKind k);
/// Accepts the canonical name or its kebab-case CLI form ("rate-w1").
ExperimentKind experiment_from_name(const std::string& name);

// ---- JSON config blocks (defaults = the documented desk-scale runs) ----

struct ObjectiveBlock {
  std::string kind = "QuadraticWell";  // or "CosinePerturbedQuadratic"
  int dim = 1;
  double scale = 1.0;
  double amp = 0.1;  // cosine ripple amplitude; ignored for the pure well
};

struct NoiseBlock {
  std::string kind = "AdditiveGaussian";  // or "AdditiveStudentT"
  double scale = 1.0;
  double dof = 9.0;  // Student-t only
};

struct ModelBlock {
  double gamma = 5.0;
  double beta = 1.0;
  int N = 1;  // mini-batch size
};

struct ScheduleBlock {
  std::string kind = "constant";  // or "polynomial"
  double eta = 0.01;
  double alpha = 0.5;  // polynomial decay exponent
  double omega = 0.5;
  double theta = 1.0;
  std::int64_t burn_in = 1;
};

struct RunBlock {
  std::int64_t trajectories = 1000;
  double horizon = 10.0;  // target t_n; snapped to the schedule grid
  std::uint64_t seed = 1;
  int threads = 1;
  std::string system = "SGDm";  // Simulate only: which system to evolve
  std::string stream_mode = "independent";  // or "brownian" (shared streams)
  std::vector<double> m0, x0;   // start point; empty → all-ones vectors
  std::vector<double> record;   // extra record times; empty → horizon only
};

// ---- per-experiment tuning (verdict tolerances are config, hence hashed) ----

struct RateW1Block {
  std::vector<double> eta_ladder{0.1, 0.05, 0.025, 0.0125};
  int n_proj = 128;
  double slope_min = 0.35;
  double slope_max = 0.7;
  /// Distance at the largest η must exceed this multiple of its noise floor.
  double min_top_signal_ratio = 3.0;
  std::vector<int> batch_ladder;  // optional N ladder diagnostic
};

struct RateTVBlock {
  std::vector<double> eta_ladder{0.1, 0.05, 0.025, 0.0125};
  int bins_per_axis = 64;
  double box_nsig = 5.0;
  int batch_lo = 1;
  int batch_hi = 100;
  double batch_eta = 0.0125;  // fixed η for the batch-size comparison
  /// Precondition cap: requires max ladder η ≤ c/d².
  double eta1_cap_c = 1.0;
};

struct ContractionBlock {
  double delta = 0.01;
  double r2_min = 0.9;
  /// Relative band around the drift-matrix eigenvalue (quadratic well only).
  double eigen_tol_rel = 0.02;
  std::vector<double> m0_b, x0_b;  // second start; empty → −m0, −x0
};

struct OneStepBlock {
  std::vector<double> eta_ladder{0.2, 0.1, 0.05, 0.025};
  int n_proj = 128;
  double slope_min = 1.2;
  double slope_max = 1.8;
};

struct GeneralizationBlock {
  /// Pass iff excess risk < risk_factor · J · d.
  double risk_factor = 3.0;
  std::vector<double> beta_ladder;  // optional diagnostic
};

struct DriftCheckBlock {
  int points = 10000;
  double radius = 10.0;
  double tol = 1e-9;
};

struct ScheduleCheckBlock {
  std::int64_t k_max = 1000;
  std::vector<double> eps_grid{0.0, 0.25, 0.5};
};

struct StationaryCheckBlock {
  double tol_rel = 0.10;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Simulate;
  ObjectiveBlock objective;
  NoiseBlock noise;
  ModelBlock model;
  ScheduleBlock schedule;
  RunBlock run;
  RateW1Block rate_w1;
  RateTVBlock rate_tv;
  ContractionBlock contraction;
  OneStepBlock one_step;
  GeneralizationBlock generalization;
  DriftCheckBlock drift;
  ScheduleCheckBlock schedule_check;
  StationaryCheckBlock stationary;

  /// Block-level sanity; the module constructors re-validate on build.
  void validate() const;
};

/// Strict parse: unknown keys anywhere are an error, types must match.
/// Missing keys take the defaults above.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical serialization: every field materialized, keys sorted. Equal
/// configs produce identical text, which is what gets hashed.
std::string config_to_json_text(const ExperimentConfig& cfg);

/// FNV-1a 64-bit over the canonical text; hex form is what manifests embed.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

// ---- block → module-object builders (each validates) ----

Objective build_objective(const ExperimentConfig& cfg);          // noise moments attached
GradNoiseModel build_noise(const ExperimentConfig& cfg);
ModelParams build_params(const ExperimentConfig& cfg);           // d from objective
StepSchedule build_schedule(const ExperimentConfig& cfg);        // cfg.schedule.eta
StepSchedule build_schedule_with_eta(const ExperimentConfig& cfg, double eta);
State build_start(const ExperimentConfig& cfg);                  // default 1-vectors

}  // namespace sgdmlab
