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

#ifndef PILCO_JOINT_BELIEF_H_
#define PILCO_JOINT_BELIEF_H_

#include <vector>

#include "pilco/gaussian.h"

namespace pilco {

// A growing Gaussian over stacked variables together with forward-mode
// derivatives of its moments with respect to a fixed set of base variables
// (columns). Each Append maps a subset of the current variables through a
// stage and adds the outputs as new variables; the cross-covariance between
// every existing variable and the outputs follows from the stage's
// coefficient matrix: cov[z, out] = cov[z, in] * coef.
class JointBelief {
 public:
  // Belief with derivative columns `num_columns` seeded by the given
  // Jacobians (dmean: n x cols, dcov: n*n x cols). Empty Jacobians disable
  // derivative tracking.
  JointBelief(VectorXd mean, MatrixXd cov, MatrixXd dmean, MatrixXd dcov);

  // Same, with derivative tracking disabled.
  JointBelief(VectorXd mean, MatrixXd cov);

  int dim() const { return static_cast<int>(mean_.size()); }
  int num_columns() const { return static_cast<int>(dmean_.cols()); }
  bool tracks_derivatives() const { return track_; }

  const VectorXd& mean() const { return mean_; }
  const MatrixXd& cov() const { return cov_; }
  const MatrixXd& dmean() const { return dmean_; }
  const MatrixXd& dcov() const { return dcov_; }

  VectorXd SubMean(const std::vector<int>& idx) const;
  MatrixXd SubCov(const std::vector<int>& idx) const;

  // Appends the stage outputs; returns the indices of the new variables.
  // Stage parameter Jacobians (if any) are added into columns
  // [param_offset, param_offset + num_params).
  std::vector<int> Append(const std::vector<int>& inputs,
                          const StageMoments& stage, int param_offset = 0);

  // Derivative rows for the sub-block idx (mean: k x cols; cov: k*k x cols).
  MatrixXd SubDMean(const std::vector<int>& idx) const;
  MatrixXd SubDCov(const std::vector<int>& idx) const;

 private:
  VectorXd mean_;
  MatrixXd cov_;
  bool track_ = false;
  MatrixXd dmean_;
  MatrixXd dcov_;
};

// Appends (sin, cos) of the angle dims of `state_idx` to `joint`; returns the
// feature indices in TrigFeatures order (plain dims reuse existing indices).
std::vector<int> AppendTrigFeatures(const TrigFeatures& trig,
                                    const std::vector<int>& state_idx,
                                    JointBelief* joint);

}  // namespace pilco

#endif  // PILCO_JOINT_BELIEF_H_
