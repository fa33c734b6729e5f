#include "sgdmlab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sgdmlab {

namespace {

using nlohmann::json;

const char* kExperimentNames[] = {
    "Simulate",      "RateW1",          "RateTV",
    "Contraction",   "DriftCheck",      "ScheduleCheck",
    "StationaryCheck", "OneStepCheck",  "Generalization",
};
const char* kExperimentCli[] = {
    "simulate",      "rate-w1",         "rate-tv",
    "contraction",   "drift-check",     "schedule-check",
    "stationary-check", "one-step-check", "generalization",
};
constexpr int kExperimentCount = 9;

void expect_keys(const json& j, const char* block,
                 std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ConfigError(std::string("config: '") + block + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string("config: unknown key '") + it.key() +
                        "' in " + block);
  }
}

template <typename T>
void read_field(const json& j, const char* key, T* out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key +
                      "': " + e.what());
  }
}

void parse_objective(const json& j, ObjectiveBlock* b) {
  expect_keys(j, "objective", {"kind", "dim", "scale", "amp"});
  read_field(j, "kind", &b->kind);
  read_field(j, "dim", &b->dim);
  read_field(j, "scale", &b->scale);
  read_field(j, "amp", &b->amp);
}

void parse_noise(const json& j, NoiseBlock* b) {
  expect_keys(j, "noise", {"kind", "scale", "dof"});
  read_field(j, "kind", &b->kind);
  read_field(j, "scale", &b->scale);
  read_field(j, "dof", &b->dof);
}

void parse_model(const json& j, ModelBlock* b) {
  expect_keys(j, "model", {"gamma", "beta", "N"});
  read_field(j, "gamma", &b->gamma);
  read_field(j, "beta", &b->beta);
  read_field(j, "N", &b->N);
}

void parse_schedule(const json& j, ScheduleBlock* b) {
  expect_keys(j, "schedule",
              {"kind", "eta", "alpha", "omega", "theta", "burn_in"});
  read_field(j, "kind", &b->kind);
  read_field(j, "eta", &b->eta);
  read_field(j, "alpha", &b->alpha);
  read_field(j, "omega", &b->omega);
  read_field(j, "theta", &b->theta);
  read_field(j, "burn_in", &b->burn_in);
}

void parse_run(const json& j, RunBlock* b) {
  expect_keys(j, "run",
              {"trajectories", "horizon", "seed", "threads", "system",
               "stream_mode", "m0", "x0", "record"});
  read_field(j, "trajectories", &b->trajectories);
  read_field(j, "horizon", &b->horizon);
  read_field(j, "seed", &b->seed);
  read_field(j, "threads", &b->threads);
  read_field(j, "system", &b->system);
  read_field(j, "stream_mode", &b->stream_mode);
  read_field(j, "m0", &b->m0);
  read_field(j, "x0", &b->x0);
  read_field(j, "record", &b->record);
}

void parse_rate_w1(const json& j, RateW1Block* b) {
  expect_keys(j, "rate_w1",
              {"eta_ladder", "n_proj", "slope_min", "slope_max",
               "min_top_signal_ratio", "batch_ladder"});
  read_field(j, "eta_ladder", &b->eta_ladder);
  read_field(j, "n_proj", &b->n_proj);
  read_field(j, "slope_min", &b->slope_min);
  read_field(j, "slope_max", &b->slope_max);
  read_field(j, "min_top_signal_ratio", &b->min_top_signal_ratio);
  read_field(j, "batch_ladder", &b->batch_ladder);
}

void parse_rate_tv(const json& j, RateTVBlock* b) {
  expect_keys(j, "rate_tv",
              {"eta_ladder", "bins_per_axis", "box_nsig", "batch_lo",
               "batch_hi", "batch_eta", "eta1_cap_c"});
  read_field(j, "eta_ladder", &b->eta_ladder);
  read_field(j, "bins_per_axis", &b->bins_per_axis);
  read_field(j, "box_nsig", &b->box_nsig);
  read_field(j, "batch_lo", &b->batch_lo);
  read_field(j, "batch_hi", &b->batch_hi);
  read_field(j, "batch_eta", &b->batch_eta);
  read_field(j, "eta1_cap_c", &b->eta1_cap_c);
}

void parse_contraction(const json& j, ContractionBlock* b) {
  expect_keys(j, "contraction",
              {"delta", "r2_min", "eigen_tol_rel", "m0_b", "x0_b"});
  read_field(j, "delta", &b->delta);
  read_field(j, "r2_min", &b->r2_min);
  read_field(j, "eigen_tol_rel", &b->eigen_tol_rel);
  read_field(j, "m0_b", &b->m0_b);
  read_field(j, "x0_b", &b->x0_b);
}

void parse_one_step(const json& j, OneStepBlock* b) {
  expect_keys(j, "one_step",
              {"eta_ladder", "n_proj", "slope_min", "slope_max"});
  read_field(j, "eta_ladder", &b->eta_ladder);
  read_field(j, "n_proj", &b->n_proj);
  read_field(j, "slope_min", &b->slope_min);
  read_field(j, "slope_max", &b->slope_max);
}

void parse_generalization(const json& j, GeneralizationBlock* b) {
  expect_keys(j, "generalization", {"risk_factor", "beta_ladder"});
  read_field(j, "risk_factor", &b->risk_factor);
  read_field(j, "beta_ladder", &b->beta_ladder);
}

void parse_drift(const json& j, DriftCheckBlock* b) {
  expect_keys(j, "drift_check", {"points", "radius", "tol"});
  read_field(j, "points", &b->points);
  read_field(j, "radius", &b->radius);
  read_field(j, "tol", &b->tol);
}

void parse_schedule_check(const json& j, ScheduleCheckBlock* b) {
  expect_keys(j, "schedule_check", {"k_max", "eps_grid"});
  read_field(j, "k_max", &b->k_max);
  read_field(j, "eps_grid", &b->eps_grid);
}

void parse_stationary(const json& j, StationaryCheckBlock* b) {
  expect_keys(j, "stationary_check", {"tol_rel"});
  read_field(j, "tol_rel", &b->tol_rel);
}

}  // namespace

std::string to_string(ExperimentKind k) {
  return kExperimentNames[static_cast<int>(k)];
}

ExperimentKind experiment_from_name(const std::string& name) {
  for (int i = 0; i < kExperimentCount; ++i)
    if (name == kExperimentNames[i] || name == kExperimentCli[i])
      return static_cast<ExperimentKind>(i);
  throw ConfigError("config: unknown experiment '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (objective.kind != "QuadraticWell" &&
      objective.kind != "CosinePerturbedQuadratic")
    throw ConfigError("config: objective.kind must be QuadraticWell or "
                      "CosinePerturbedQuadratic");
  if (objective.dim < 1) throw ConfigError("config: objective.dim must be >= 1");
  if (noise.kind != "AdditiveGaussian" && noise.kind != "AdditiveStudentT")
    throw ConfigError(
        "config: noise.kind must be AdditiveGaussian or AdditiveStudentT");
  if (!(noise.scale >= 0.0))
    throw ConfigError("config: noise.scale must be nonnegative");
  if (!(model.gamma >= 0.0) || !(model.beta >= 0.0))
    throw ConfigError("config: model.gamma and model.beta must be nonnegative");
  if (model.N < 1) throw ConfigError("config: model.N must be >= 1");
  if (schedule.kind != "constant" && schedule.kind != "polynomial")
    throw ConfigError("config: schedule.kind must be constant or polynomial");
  if (run.trajectories < 0)
    throw ConfigError("config: run.trajectories must be >= 0");
  if (!(run.horizon > 0.0))
    throw ConfigError("config: run.horizon must be positive");
  if (run.threads < 1) throw ConfigError("config: run.threads must be >= 1");
  if (run.system != "SGDm" && run.system != "Intermediate" &&
      run.system != "LangevinEM" && run.system != "ExactOU")
    throw ConfigError("config: run.system must be one of SGDm, Intermediate, "
                      "LangevinEM, ExactOU");
  if (run.stream_mode != "independent" && run.stream_mode != "brownian")
    throw ConfigError("config: run.stream_mode must be independent or brownian");
  const auto dim = static_cast<std::size_t>(objective.dim);
  if (!run.m0.empty() && run.m0.size() != dim)
    throw ConfigError("config: run.m0 must have objective.dim entries");
  if (!run.x0.empty() && run.x0.size() != dim)
    throw ConfigError("config: run.x0 must have objective.dim entries");
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  expect_keys(j, "top level",
              {"experiment", "objective", "noise", "model", "schedule", "run",
               "rate_w1", "rate_tv", "contraction", "one_step",
               "generalization", "drift_check", "schedule_check",
               "stationary_check"});
  ExperimentConfig cfg;
  if (j.contains("experiment")) {
    std::string name;
    read_field(j, "experiment", &name);
    cfg.experiment = experiment_from_name(name);
  }
  if (j.contains("objective")) parse_objective(j.at("objective"), &cfg.objective);
  if (j.contains("noise")) parse_noise(j.at("noise"), &cfg.noise);
  if (j.contains("model")) parse_model(j.at("model"), &cfg.model);
  if (j.contains("schedule")) parse_schedule(j.at("schedule"), &cfg.schedule);
  if (j.contains("run")) parse_run(j.at("run"), &cfg.run);
  if (j.contains("rate_w1")) parse_rate_w1(j.at("rate_w1"), &cfg.rate_w1);
  if (j.contains("rate_tv")) parse_rate_tv(j.at("rate_tv"), &cfg.rate_tv);
  if (j.contains("contraction"))
    parse_contraction(j.at("contraction"), &cfg.contraction);
  if (j.contains("one_step")) parse_one_step(j.at("one_step"), &cfg.one_step);
  if (j.contains("generalization"))
    parse_generalization(j.at("generalization"), &cfg.generalization);
  if (j.contains("drift_check")) parse_drift(j.at("drift_check"), &cfg.drift);
  if (j.contains("schedule_check"))
    parse_schedule_check(j.at("schedule_check"), &cfg.schedule_check);
  if (j.contains("stationary_check"))
    parse_stationary(j.at("stationary_check"), &cfg.stationary);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;  // nlohmann::json orders keys lexicographically — canonical text
  j["experiment"] = to_string(cfg.experiment);
  j["objective"] = {{"kind", cfg.objective.kind},
                    {"dim", cfg.objective.dim},
                    {"scale", cfg.objective.scale},
                    {"amp", cfg.objective.amp}};
  j["noise"] = {{"kind", cfg.noise.kind},
                {"scale", cfg.noise.scale},
                {"dof", cfg.noise.dof}};
  j["model"] = {{"gamma", cfg.model.gamma},
                {"beta", cfg.model.beta},
                {"N", cfg.model.N}};
  j["schedule"] = {{"kind", cfg.schedule.kind},
                   {"eta", cfg.schedule.eta},
                   {"alpha", cfg.schedule.alpha},
                   {"omega", cfg.schedule.omega},
                   {"theta", cfg.schedule.theta},
                   {"burn_in", cfg.schedule.burn_in}};
  j["run"] = {{"trajectories", cfg.run.trajectories},
              {"horizon", cfg.run.horizon},
              {"seed", cfg.run.seed},
              {"threads", cfg.run.threads},
              {"system", cfg.run.system},
              {"stream_mode", cfg.run.stream_mode},
              {"m0", cfg.run.m0},
              {"x0", cfg.run.x0},
              {"record", cfg.run.record}};
  j["rate_w1"] = {{"eta_ladder", cfg.rate_w1.eta_ladder},
                  {"n_proj", cfg.rate_w1.n_proj},
                  {"slope_min", cfg.rate_w1.slope_min},
                  {"slope_max", cfg.rate_w1.slope_max},
                  {"min_top_signal_ratio", cfg.rate_w1.min_top_signal_ratio},
                  {"batch_ladder", cfg.rate_w1.batch_ladder}};
  j["rate_tv"] = {{"eta_ladder", cfg.rate_tv.eta_ladder},
                  {"bins_per_axis", cfg.rate_tv.bins_per_axis},
                  {"box_nsig", cfg.rate_tv.box_nsig},
                  {"batch_lo", cfg.rate_tv.batch_lo},
                  {"batch_hi", cfg.rate_tv.batch_hi},
                  {"batch_eta", cfg.rate_tv.batch_eta},
                  {"eta1_cap_c", cfg.rate_tv.eta1_cap_c}};
  j["contraction"] = {{"delta", cfg.contraction.delta},
                      {"r2_min", cfg.contraction.r2_min},
                      {"eigen_tol_rel", cfg.contraction.eigen_tol_rel},
                      {"m0_b", cfg.contraction.m0_b},
                      {"x0_b", cfg.contraction.x0_b}};
  j["one_step"] = {{"eta_ladder", cfg.one_step.eta_ladder},
                   {"n_proj", cfg.one_step.n_proj},
                   {"slope_min", cfg.one_step.slope_min},
                   {"slope_max", cfg.one_step.slope_max}};
  j["generalization"] = {{"risk_factor", cfg.generalization.risk_factor},
                         {"beta_ladder", cfg.generalization.beta_ladder}};
  j["drift_check"] = {{"points", cfg.drift.points},
                      {"radius", cfg.drift.radius},
                      {"tol", cfg.drift.tol}};
  j["schedule_check"] = {{"k_max", cfg.schedule_check.k_max},
                         {"eps_grid", cfg.schedule_check.eps_grid}};
  j["stationary_check"] = {{"tol_rel", cfg.stationary.tol_rel}};
  return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json_text(cfg);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return std::string(buf);
}

Objective build_objective(const ExperimentConfig& cfg) {
  Objective o = cfg.objective.kind == "QuadraticWell"
                    ? Objective::quadratic_well(cfg.objective.dim,
                                                cfg.objective.scale)
                    : Objective::cosine_perturbed(cfg.objective.dim,
                                                  cfg.objective.scale,
                                                  cfg.objective.amp);
  return o.with_noise_constants(build_noise(cfg));
}

GradNoiseModel build_noise(const ExperimentConfig& cfg) {
  GradNoiseModel nm;
  nm.kind = cfg.noise.kind == "AdditiveGaussian" ? NoiseKind::AdditiveGaussian
                                                 : NoiseKind::AdditiveStudentT;
  nm.scale = cfg.noise.scale;
  nm.dof = cfg.noise.dof;
  nm.validate();
  return nm;
}

ModelParams build_params(const ExperimentConfig& cfg) {
  ModelParams p;
  p.gamma = cfg.model.gamma;
  p.beta = cfg.model.beta;
  p.N = cfg.model.N;
  p.d = cfg.objective.dim;
  p.validate();
  return p;
}

StepSchedule build_schedule(const ExperimentConfig& cfg) {
  return build_schedule_with_eta(cfg, cfg.schedule.eta);
}

StepSchedule build_schedule_with_eta(const ExperimentConfig& cfg, double eta) {
  const auto& s = cfg.schedule;
  if (s.kind == "constant")
    return StepSchedule::constant(eta, s.omega, s.theta, s.burn_in);
  return StepSchedule::polynomial(eta, s.alpha, s.omega, s.theta, s.burn_in);
}

State build_start(const ExperimentConfig& cfg) {
  const int d = cfg.objective.dim;
  State s;
  if (cfg.run.m0.empty()) {
    s.m = Vec::Ones(d);
  } else {
    s.m = Eigen::Map<const Vec>(cfg.run.m0.data(),
                                static_cast<Eigen::Index>(cfg.run.m0.size()));
  }
  if (cfg.run.x0.empty()) {
    s.x = Vec::Ones(d);
  } else {
    s.x = Eigen::Map<const Vec>(cfg.run.x0.data(),
                                static_cast<Eigen::Index>(cfg.run.x0.size()));
  }
  return s;
}

}  // namespace sgdmlab
