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

// The episodic learning loop: one random episode, then per episode fit the
// GP dynamics model on all data, minimize the predicted long-term cost over
// the policy parameters, apply the policy once to the plant and evaluate it
// on fresh test episodes. Also aggregates learning curves across seeds.

#ifndef PILCO_HARNESS_H_
#define PILCO_HARNESS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pilco/config.h"
#include "pilco/io.h"

namespace pilco {

// Independent seed for (run seed, stream, index) by SplitMix64 mixing.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index);

// Initial policy of the configured variant.
Policy InitialPolicy(const ExperimentConfig& config, std::mt19937_64* rng);

RolloutSetup MakeRolloutSetup(const ExperimentConfig& config);

// Appends the transitions of an episode: inputs [features(x_t) or x_t,
// u_t], targets x_{t+1} - x_t.
void AppendTransitions(const Episode& episode, const EnvSpec& spec,
                       bool features, MatrixXd* inputs, MatrixXd* targets);

struct EpisodeRecord {
  int episode = 0;              // learned episode, 1-based
  int data_points = 0;          // transitions the policy was optimized on
  double experience_s = 0.0;    // interaction time behind those transitions
  double predicted_cost = 0.0;  // J of the optimized policy
  int test_successes = 0;
  int test_rollouts = 0;
  double success_rate = 0.0;
  bool learned = false;          // test successes reach the threshold
  bool episode_success = false;  // the applied episode itself succeeded
  int reseeds = 0;
  std::string optim_status;
  int optim_iterations = 0;
  double wall_s = 0.0;  // excluded from the serialized record
};

struct LearningRecord {
  std::string name;
  std::string env;
  std::string method;
  std::string ablation;
  std::uint64_t seed = 0;
  // Training-set size when the loop ended.
  int final_data_points = 0;
  std::vector<EpisodeRecord> episodes;

  // First learned episode, or -1.
  int FirstLearned() const;
  double FinalSuccessRate() const;
};

// Deterministic tab-separated form (no wall times), with '#' metadata lines.
std::string RecordToTsv(const LearningRecord& record);
LearningRecord RecordFromTsv(const std::string& text);

struct LearnContext {
  JsonlLog* log = nullptr;
  // Writes per-episode policy, model, episode and predicted-rollout files
  // under <output_dir>/seed_<seed>/.
  bool write_artifacts = false;
};

// Runs the loop for one seed. Diverged or undefined policy evaluations
// re-draw the policy parameters up to max_reseeds times per episode.
LearningRecord LearnSeed(const ExperimentConfig& config, std::uint64_t seed,
                         const LearnContext& context);

// All configured seeds, `jobs` at a time; records come back in seed order.
// Writes <output_dir>/record_seed<seed>.tsv for each.
std::vector<LearningRecord> LearnAll(const ExperimentConfig& config, int jobs,
                                     const LearnContext& context);

struct CurvePoint {
  double experience_s = 0.0;
  double mean_success = 0.0;
  double stderr_success = 0.0;  // sample SD / sqrt(seeds), 0 for one seed
  int seeds = 0;
};

// Mean success over seeds per episode index. A seed that stopped early
// keeps its last success rate for later episodes.
std::vector<CurvePoint> LearningCurve(const std::vector<LearningRecord>& recs);
std::string CurveToTsv(const std::vector<CurvePoint>& curve);

// Groups records by (env, method, ablation) and writes
// curve_<env>_<method>_<ablation>.tsv into `dir`; returns the paths.
std::vector<std::string> EmitCurves(const std::vector<LearningRecord>& recs,
                                    const std::string& dir);

// Reads every record_*.tsv under `dir`, sorted by file name.
std::vector<LearningRecord> LoadRecords(const std::string& dir);

}  // namespace pilco

#endif  // PILCO_HARNESS_H_
