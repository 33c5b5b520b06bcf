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

// File formats: GP models and policies as versioned JSON, episodes and
// predicted rollouts as tab-separated tables, and an append-only JSONL log.

#ifndef PILCO_IO_H_
#define PILCO_IO_H_

#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "pilco/environment.h"
#include "pilco/gp.h"
#include "pilco/optimizer.h"
#include "pilco/policy.h"
#include "pilco/rollout.h"

namespace pilco {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kPolicyFormatVersion = 1;

// Inputs, targets and natural-space hyperparameters; loading re-conditions
// the GP on them.
std::string ModelToJson(const GpModel& model);
GpModel ModelFromJson(const std::string& text);

// Variant tag, shape metadata, control limits and the flat parameters.
std::string PolicyToJson(const Policy& policy);
Policy PolicyFromJson(const std::string& text);

// One row per recorded state: time, state..., control... (the final state
// has no control and shows "nan"). Header lines start with '#' and carry
// the environment hash and the seed.
std::string EpisodeToTsv(const Episode& episode, const EnvSpec& spec);

// One row per predicted belief: step, time, mean..., variance...,
// expected cost, cost standard deviation.
std::string RolloutToTsv(const RolloutReport& report, double dt);

// Optimizer trace summary: iterations, evaluations, status, first and last
// value, final gradient norm.
std::string TraceSummaryJson(const OptimResult& result);

std::string ReadFile(const std::string& path);
// Creates parent directories as needed.
void WriteFile(const std::string& path, const std::string& contents);

// Append-only line-delimited JSON log. Safe to share between threads.
class JsonlLog {
 public:
  JsonlLog() = default;
  explicit JsonlLog(const std::string& path);

  bool is_open() const { return out_.is_open(); }
  // Appends one line; `json_object` must be a single-line JSON object.
  void Append(const std::string& json_object);

 private:
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace pilco

#endif  // PILCO_IO_H_
