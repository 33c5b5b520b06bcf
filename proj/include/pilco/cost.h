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

// Saturating cost c(y) = 1 - exp(-1/2 (y - target)^T W (y - target)) on a
// cost-space vector y, its expectation and standard deviation under a
// Gaussian, and the map from states to cost space.

#ifndef PILCO_COST_H_
#define PILCO_COST_H_

#include "pilco/gaussian.h"
#include "pilco/joint_belief.h"

namespace pilco {

struct CostConfig {
  VectorXd target;
  MatrixXd precision;  // W, PSD
  double sigma_c = 1.0;
  double ucb_kappa = 0.0;

  // precision = diag(selector) / sigma_c^2 with 0/1 selector entries.
  static CostConfig Selector(const VectorXd& target, const VectorXd& selector,
                             double sigma_c);

  int dim() const { return static_cast<int>(target.size()); }
};

// Deterministic cost.
double Cost(const CostConfig& cfg, const VectorXd& y);

struct CostMoment {
  double value;
  VectorXd d_mean;  // gradient w.r.t. the mean
  MatrixXd d_cov;   // symmetric gradient w.r.t. the covariance
};

// E[c(y)] for y ~ N(mean, cov).
CostMoment ExpectedCost(const CostConfig& cfg, const VectorXd& mean,
                        const MatrixXd& cov);
CostMoment ExpectedCost(const CostConfig& cfg, const GaussianBelief& belief);

// sqrt(max(0, E[c^2] - E[c]^2)); gradients are zero where the std is zero.
CostMoment CostStd(const CostConfig& cfg, const VectorXd& mean,
                   const MatrixXd& cov);
CostMoment CostStd(const CostConfig& cfg, const GaussianBelief& belief);

// Cost-space map y = lin * features(x) + offset, where features(x) replaces
// the angle dims of x by their (sin, cos) pairs.
struct CostSpaceMap {
  TrigFeatures trig;
  MatrixXd lin;     // cost_dim x feature_dim
  VectorXd offset;  // cost_dim

  int cost_dim() const { return static_cast<int>(lin.rows()); }
  VectorXd Apply(const VectorXd& x) const;
};

// Appends the trig features of `state_idx` and the cost-space vector to
// `joint`; returns the indices of the cost-space variables.
std::vector<int> AppendCostSpace(const CostSpaceMap& map,
                                 const std::vector<int>& state_idx,
                                 JointBelief* joint);

// Gaussian (exact first two moments) over the cost space for a state
// belief.
GaussianBelief MapToCostSpace(const CostSpaceMap& map,
                              const GaussianBelief& state);

}  // namespace pilco

#endif  // PILCO_COST_H_
