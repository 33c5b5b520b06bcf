// Copyright 2026 The pilco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pilco/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "json.hpp"

namespace pilco {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t {
  kRandomEpisode = 1,
  kPolicyEpisode = 2,
  kTestEpisode = 3,
  kPolicyInit = 4,
  kModelFit = 5,
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string SeedDir(const ExperimentConfig& c, std::uint64_t seed) {
  return c.output_dir + "/seed_" + std::to_string(seed);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

Policy InitialPolicy(const ExperimentConfig& config, std::mt19937_64* rng) {
  const EnvSpec& env = config.env;
  const TrigFeatures feat = env.features();
  const int d = feat.feature_dim(), f = env.control_dim();
  std::normal_distribution<double> normal;
  if (config.policy_variant == PolicyVariant::kLinear) {
    Policy p = Policy::Linear(d, f, env.u_max);
    VectorXd theta(p.num_params());
    for (int i = 0; i < theta.size(); ++i)
      theta(i) = config.policy_init.linear_std * normal(*rng);
    p.SetParams(theta);
    return p;
  }
  const int n = config.num_basis;
  Policy p = Policy::Rbf(d, f, n, env.u_max);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(env.init_cov);
  const MatrixXd root = config.policy_init.center_std_scale *
                        es.eigenvectors() *
                        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  VectorXd theta(p.num_params());
  int k = 0;
  for (int i = 0; i < n; ++i) {
    VectorXd z(env.state_dim());
    for (int j = 0; j < z.size(); ++j) z(j) = normal(*rng);
    const VectorXd c = feat.Apply(env.init_mean + root * z);
    for (int j = 0; j < d; ++j) theta(k++) = c(j);
  }
  for (int i = 0; i < f * d; ++i) theta(k++) = config.policy_init.log_length;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < f; ++a)
      theta(k++) = config.policy_init.target_std * env.u_max(a) * normal(*rng);
  p.SetParams(theta);
  return p;
}

RolloutSetup MakeRolloutSetup(const ExperimentConfig& config) {
  RolloutSetup s;
  s.features = config.env.features();
  s.model_uses_features = config.model_uses_features;
  s.cost_map = config.env.cost_map();
  s.cost = config.env.cost_config(config.ucb_kappa);
  s.method = config.method;
  s.options.include_model_variance =
      config.ablation == ModelAblation::kBayesian;
  return s;
}

void AppendTransitions(const Episode& episode, const EnvSpec& spec,
                       bool features, MatrixXd* inputs, MatrixXd* targets) {
  const TrigFeatures feat = spec.features();
  const int q =
      (features ? feat.feature_dim() : spec.state_dim()) + spec.control_dim();
  const int n0 = static_cast<int>(inputs->rows());
  const int steps = episode.steps();
  if (n0 == 0) {
    inputs->resize(0, q);
    targets->resize(0, spec.state_dim());
  } else if (inputs->cols() != q) {
    throw DomainError("transition input width does not match existing data");
  }
  inputs->conservativeResize(n0 + steps, q);
  targets->conservativeResize(n0 + steps, spec.state_dim());
  for (int t = 0; t < steps; ++t) {
    const VectorXd x = episode.states.row(t).transpose();
    inputs->row(n0 + t) << (features ? feat.Apply(x) : x).transpose(),
        episode.controls.row(t);
    targets->row(n0 + t) = episode.states.row(t + 1) - episode.states.row(t);
  }
}

int LearningRecord::FirstLearned() const {
  for (const EpisodeRecord& e : episodes)
    if (e.learned) return e.episode;
  return -1;
}

double LearningRecord::FinalSuccessRate() const {
  return episodes.empty() ? 0.0 : episodes.back().success_rate;
}

namespace {

constexpr const char* kRecordColumns[] = {
    "episode",         "data_points",   "experience_s", "predicted_cost",
    "test_successes",  "test_rollouts", "success_rate", "learned",
    "episode_success", "reseeds",       "optim_status", "optim_iterations"};

}  // namespace

std::string RecordToTsv(const LearningRecord& r) {
  std::ostringstream out;
  out << "# name=" << r.name << " env=" << r.env << " method=" << r.method
      << " ablation=" << r.ablation << " seed=" << r.seed
      << " final_data_points=" << r.final_data_points << "\n";
  for (size_t i = 0; i < std::size(kRecordColumns); ++i)
    out << (i ? "\t" : "") << kRecordColumns[i];
  out << "\n";
  for (const EpisodeRecord& e : r.episodes) {
    out << e.episode << "\t" << e.data_points << "\t" << Num(e.experience_s)
        << "\t" << Num(e.predicted_cost) << "\t" << e.test_successes << "\t"
        << e.test_rollouts << "\t" << Num(e.success_rate) << "\t"
        << (e.learned ? 1 : 0) << "\t" << (e.episode_success ? 1 : 0) << "\t"
        << e.reseeds << "\t" << e.optim_status << "\t" << e.optim_iterations
        << "\n";
  }
  return out.str();
}

LearningRecord RecordFromTsv(const std::string& text) {
  LearningRecord r;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string kv;
      while (meta >> kv) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "name") r.name = v;
        if (k == "env") r.env = v;
        if (k == "method") r.method = v;
        if (k == "ablation") r.ablation = v;
        if (k == "seed") r.seed = std::stoull(v);
        if (k == "final_data_points") r.final_data_points = std::stoi(v);
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, '\t');) f.push_back(cell);
    if (f.size() != 12)
      throw DomainError("malformed learning record row: " + line);
    EpisodeRecord e;
    int learned = 0, success = 0;
    try {
      e.episode = std::stoi(f[0]);
      e.data_points = std::stoi(f[1]);
      e.experience_s = std::stod(f[2]);
      e.predicted_cost = std::stod(f[3]);
      e.test_successes = std::stoi(f[4]);
      e.test_rollouts = std::stoi(f[5]);
      e.success_rate = std::stod(f[6]);
      learned = std::stoi(f[7]);
      success = std::stoi(f[8]);
      e.reseeds = std::stoi(f[9]);
      e.optim_status = f[10];
      e.optim_iterations = std::stoi(f[11]);
    } catch (const std::logic_error&) {
      throw DomainError("malformed learning record row: " + line);
    }
    e.learned = learned != 0;
    e.episode_success = success != 0;
    r.episodes.push_back(e);
  }
  if (!header_seen) throw DomainError("learning record has no header");
  return r;
}

LearningRecord LearnSeed(const ExperimentConfig& config, std::uint64_t seed,
                         const LearnContext& context) {
  config.Validate();
  const EnvSpec& env = config.env;
  const int horizon = env.horizon_steps();
  const GaussianBelief initial(env.init_mean, env.init_cov);
  const RolloutSetup setup = MakeRolloutSetup(config);
  const std::string dir = SeedDir(config, seed);

  LearningRecord record;
  record.name = config.name;
  record.env = EnvName(env.variant);
  record.method = MethodName(config.method);
  record.ablation = AblationName(config.ablation);
  record.seed = seed;

  std::mt19937_64 init_rng(DeriveSeed(seed, kPolicyInit, 0));
  MatrixXd inputs, targets;
  const Episode first =
      RunEpisode(env, nullptr, DeriveSeed(seed, kRandomEpisode, 0));
  AppendTransitions(first, env, config.model_uses_features, &inputs, &targets);
  if (context.write_artifacts)
    WriteFile(dir + "/episode_0.tsv", EpisodeToTsv(first, env));

  Policy policy = InitialPolicy(config, &init_rng);
  GpModel model;
  bool have_model = false;
  std::vector<GpHyperparams> warm;

  for (int k = 1; k <= config.episodes; ++k) {
    const auto t_start = std::chrono::steady_clock::now();
    json log_line = {{"event", "episode"},
                     {"name", config.name},
                     {"seed", seed},
                     {"episode", k}};
    json errors = json::array();

    EpisodeRecord rec;
    rec.episode = k;
    rec.data_points = static_cast<int>(inputs.rows());
    rec.experience_s = k * env.horizon_seconds;

    FitOptions fit;
    fit.restarts = config.gp_restarts;
    fit.seed = DeriveSeed(seed, kModelFit, k);
    fit.optim = config.gp_optim;
    try {
      model =
          Fit(inputs, targets,
              config.gp_warm_start ? warm : std::vector<GpHyperparams>{}, fit);
      have_model = true;
      warm = model.hyperparams();
    } catch (const NumericalError& e) {
      errors.push_back(std::string("model fit: ") + e.what());
      if (!have_model) throw;
    }
    const double fit_s = Seconds(t_start);

    const auto t_opt = std::chrono::steady_clock::now();
    const RolloutEngine engine(model, setup);
    const Objective objective = [&](const VectorXd& theta, VectorXd* grad) {
      Policy trial = policy;
      trial.SetParams(theta);
      const RolloutReport r = engine.Rollout(trial, initial, horizon, true);
      *grad = r.grad;
      return r.total_cost;
    };
    OptimResult result =
        Minimize(objective, policy.params(), config.policy_optim);
    while (result.status == OptimStatus::kNonFinite &&
           rec.reseeds < config.max_reseeds) {
      ++rec.reseeds;
      policy = InitialPolicy(config, &init_rng);
      result = Minimize(objective, policy.params(), config.policy_optim);
    }
    if (result.status == OptimStatus::kNonFinite) {
      errors.push_back("policy evaluation undefined after reseeds");
    } else {
      policy.SetParams(result.x);
    }
    rec.predicted_cost = result.value;
    rec.optim_status = StatusName(result.status);
    rec.optim_iterations = result.iterations;
    const double optim_s = Seconds(t_opt);

    const auto t_eval = std::chrono::steady_clock::now();
    const Episode applied =
        RunEpisode(env, &policy, DeriveSeed(seed, kPolicyEpisode, k));
    rec.episode_success = Success(applied, env);
    AppendTransitions(applied, env, config.model_uses_features, &inputs,
                      &targets);

    rec.test_rollouts = config.test_rollouts;
    for (int i = 0; i < config.test_rollouts; ++i) {
      const Episode test =
          RunEpisode(env, &policy,
                     DeriveSeed(seed, kTestEpisode,
                                (static_cast<std::uint64_t>(k) << 32) | i));
      if (Success(test, env)) ++rec.test_successes;
    }
    rec.success_rate =
        config.test_rollouts > 0
            ? static_cast<double>(rec.test_successes) / config.test_rollouts
            : 0.0;
    rec.learned = config.test_rollouts > 0 &&
                  rec.test_successes >= config.success_threshold;
    rec.wall_s = Seconds(t_start);

    if (context.write_artifacts) {
      const std::string ks = std::to_string(k);
      WriteFile(dir + "/policy_" + ks + ".json", PolicyToJson(policy));
      WriteFile(dir + "/model_" + ks + ".json", ModelToJson(model));
      WriteFile(dir + "/episode_" + ks + ".tsv", EpisodeToTsv(applied, env));
      try {
        WriteFile(dir + "/rollout_" + ks + ".tsv",
                  RolloutToTsv(engine.Rollout(policy, initial, horizon, false),
                               env.dt_control));
      } catch (const NumericalError& e) {
        errors.push_back(std::string("predicted rollout: ") + e.what());
      }
    }

    if (context.log != nullptr) {
      log_line["data_points"] = rec.data_points;
      log_line["predicted_cost"] = rec.predicted_cost;
      log_line["test_successes"] = rec.test_successes;
      log_line["test_rollouts"] = rec.test_rollouts;
      log_line["episode_success"] = rec.episode_success;
      log_line["reseeds"] = rec.reseeds;
      log_line["optimizer"] = json::parse(TraceSummaryJson(result));
      log_line["fit_s"] = fit_s;
      log_line["optim_s"] = optim_s;
      log_line["eval_s"] = Seconds(t_eval);
      log_line["wall_s"] = rec.wall_s;
      log_line["errors"] = errors;
      context.log->Append(log_line.dump());
    }

    record.episodes.push_back(rec);
    if (rec.learned && config.stop_when_learned) break;
  }
  record.final_data_points = static_cast<int>(inputs.rows());
  return record;
}

std::vector<LearningRecord> LearnAll(const ExperimentConfig& config, int jobs,
                                     const LearnContext& context) {
  config.Validate();
  const int n = static_cast<int>(config.seeds.size());
  std::vector<LearningRecord> records(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        records[i] = LearnSeed(config, config.seeds[i], context);
        if (!config.output_dir.empty())
          WriteFile(config.output_dir + "/record_seed" +
                        std::to_string(config.seeds[i]) + ".tsv",
                    RecordToTsv(records[i]));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& f : failures)
    if (f) std::rethrow_exception(f);
  return records;
}

std::vector<CurvePoint> LearningCurve(const std::vector<LearningRecord>& recs) {
  std::vector<CurvePoint> curve;
  if (recs.empty()) return curve;
  size_t longest = 0;
  const LearningRecord* ref = &recs[0];
  for (const LearningRecord& r : recs) {
    if (r.episodes.size() > longest) {
      longest = r.episodes.size();
      ref = &r;
    }
  }
  for (size_t k = 0; k < longest; ++k) {
    std::vector<double> rates;
    for (const LearningRecord& r : recs) {
      if (r.episodes.empty()) continue;
      rates.push_back(
          r.episodes[std::min(k, r.episodes.size() - 1)].success_rate);
    }
    CurvePoint p;
    p.experience_s = ref->episodes[k].experience_s;
    p.seeds = static_cast<int>(rates.size());
    double sum = 0.0;
    for (double v : rates) sum += v;
    p.mean_success = sum / p.seeds;
    if (p.seeds > 1) {
      double ss = 0.0;
      for (double v : rates) ss += (v - p.mean_success) * (v - p.mean_success);
      p.stderr_success = std::sqrt(ss / (p.seeds - 1)) / std::sqrt(p.seeds);
    }
    curve.push_back(p);
  }
  return curve;
}

std::string CurveToTsv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "experience_s\tmean_success\tstderr\n";
  for (const CurvePoint& p : curve)
    out << Num(p.experience_s) << "\t" << Num(p.mean_success) << "\t"
        << Num(p.stderr_success) << "\n";
  return out.str();
}

std::vector<std::string> EmitCurves(const std::vector<LearningRecord>& recs,
                                    const std::string& dir) {
  if (recs.empty()) throw DomainError("curves need at least one record");
  std::map<std::string, std::vector<LearningRecord>> groups;
  for (const LearningRecord& r : recs)
    groups[r.env + "_" + r.method + "_" + r.ablation].push_back(r);
  std::vector<std::string> paths;
  for (const auto& [key, group] : groups) {
    const std::string path = dir + "/curve_" + key + ".tsv";
    WriteFile(path, CurveToTsv(LearningCurve(group)));
    paths.push_back(path);
  }
  return paths;
}

std::vector<LearningRecord> LoadRecords(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("record_", 0) == 0 &&
        entry.path().extension() == ".tsv")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<LearningRecord> recs;
  for (const std::string& f : files) recs.push_back(RecordFromTsv(ReadFile(f)));
  return recs;
}

}  // namespace pilco
