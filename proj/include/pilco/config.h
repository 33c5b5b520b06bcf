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

// Experiment configuration for the episodic learning loop, stored as JSON
// with a schema version. Every physical parameter, seed and tolerance of a
// run lives here.

#ifndef PILCO_CONFIG_H_
#define PILCO_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pilco/environment.h"
#include "pilco/gp.h"
#include "pilco/inference.h"
#include "pilco/optimizer.h"
#include "pilco/policy.h"

namespace pilco {

inline constexpr int kConfigSchemaVersion = 1;

enum class ModelAblation { kBayesian, kDeterministicMean };

std::string AblationName(ModelAblation a);
ModelAblation ParseAblation(const std::string& name);

// Initial policy parameters.
struct PolicyInit {
  // Rbf centers come from the initial-state distribution with its standard
  // deviation scaled by this factor.
  double center_std_scale = 2.0;
  // Rbf targets ~ N(0, (target_std * u_max)^2).
  double target_std = 0.1;
  double log_length = 0.0;
  // Linear parameters ~ N(0, linear_std^2).
  double linear_std = 1.0;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name = "experiment";
  EnvSpec env = EnvSpec::CartPole();

  PolicyVariant policy_variant = PolicyVariant::kRbf;
  int num_basis = 50;
  PolicyInit policy_init;

  InferenceMethod method = InferenceMethod::kMomentMatch;
  ModelAblation ablation = ModelAblation::kBayesian;
  bool model_uses_features = true;
  double ucb_kappa = 0.0;

  // Learned episodes after the initial random one.
  int episodes = 15;
  int test_rollouts = 20;
  // A policy counts as learned when at least this many test rollouts
  // succeed.
  int success_threshold = 18;
  // Stop a seed at the first learned policy.
  bool stop_when_learned = false;
  // Fresh policy draws allowed per episode after a diverged rollout.
  int max_reseeds = 5;
  std::vector<std::uint64_t> seeds = {1};

  OptimSettings policy_optim;
  int gp_restarts = 3;
  // Start evidence maximization from the previous episode's
  // hyperparameters.
  bool gp_warm_start = true;
  OptimSettings gp_optim = {.max_iters = 200, .grad_tol = 1e-6};

  std::string output_dir = "runs/experiment";

  // Throws DomainError on invalid values.
  void Validate() const;
};

// Defaults for a task: rbf policy with 50 (cart-pole) or 100 (double
// pendulum) basis functions.
ExperimentConfig DefaultConfig(EnvVariant variant);

// Parses JSON text. Missing keys keep the defaults of the chosen
// environment; unknown keys and schema mismatches throw DomainError.
ExperimentConfig ParseConfig(const std::string& text);
std::string ConfigToJson(const ExperimentConfig& config);

ExperimentConfig LoadConfig(const std::string& path);

// Canonical JSON of the environment, used for hashing.
std::string EnvToJson(const EnvSpec& env);
// 64-bit FNV-1a of the canonical environment JSON, as 16 hex digits.
std::string SpecHash(const EnvSpec& env);

}  // namespace pilco

#endif  // PILCO_CONFIG_H_
