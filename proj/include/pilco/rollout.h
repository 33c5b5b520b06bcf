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

// Multi-step belief propagation under a policy and a learned dynamics model,
// the expected long-term cost J and its gradient with respect to the policy
// parameters (forward-mode accumulation over the moment chain).
//
// One step: x -> policy features -> preliminary control -> squashed control
// u -> model input (features or raw state, then u) -> predicted difference
// -> successor x + difference.

#ifndef PILCO_ROLLOUT_H_
#define PILCO_ROLLOUT_H_

#include <vector>

#include "pilco/cost.h"
#include "pilco/gp.h"
#include "pilco/inference.h"
#include "pilco/policy.h"

namespace pilco {

// Thrown when the predicted covariance trace exceeds 1e6 times its initial
// value.
class RolloutDiverged : public NumericalError {
 public:
  RolloutDiverged(int step, double trace);
  int step() const { return step_; }

 private:
  int step_;
};

struct RolloutSetup {
  TrigFeatures features;
  // Model input: [features(x), u] when set, else [x, u].
  bool model_uses_features = true;
  CostSpaceMap cost_map;
  CostConfig cost;
  InferenceMethod method = InferenceMethod::kMomentMatch;
  InferenceOptions options;
};

struct StepResult {
  GaussianBelief next;
  // Jacobians of the successor mean (D x nb) and covariance (D*D x nb) over
  // the columns [mean_t (D), cov_t (D*D), theta (P)].
  MatrixXd d_mean;
  MatrixXd d_cov;
};

struct RolloutReport {
  std::vector<GaussianBelief> beliefs;  // t = 0..T
  std::vector<double> step_costs;       // per belief, including t = 0
  std::vector<double> cost_std;         // per belief
  double total_cost = 0.0;
  VectorXd grad;  // dJ/dtheta (empty without gradients)
};

class RolloutEngine {
 public:
  RolloutEngine(const GpModel& model, RolloutSetup setup);

  const RolloutSetup& setup() const { return setup_; }
  int model_input_dim(const Policy& policy) const;

  StepResult Step(const Policy& policy, const GaussianBelief& belief) const;

  RolloutReport Rollout(const Policy& policy, const GaussianBelief& initial,
                        int horizon, bool gradient) const;

  // Per-step cost (E[c] + kappa * std[c]) of a state belief with its
  // gradient chained through the given Jacobians (may be empty).
  double StepCost(const VectorXd& mean, const MatrixXd& cov,
                  const MatrixXd& dmean, const MatrixXd& dcov, VectorXd* grad,
                  double* std_out) const;

 private:
  // Propagates one step; the Jacobians are updated in place when tracked.
  void Advance(const Policy& policy, VectorXd* mean, MatrixXd* cov,
               MatrixXd* dmean, MatrixXd* dcov, int param_offset) const;

  RolloutSetup setup_;
  SeExpansion dynamics_;
  int state_dim_;
};

}  // namespace pilco

#endif  // PILCO_ROLLOUT_H_
