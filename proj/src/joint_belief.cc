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

#include "pilco/joint_belief.h"

#include <utility>

namespace pilco {

JointBelief::JointBelief(VectorXd mean, MatrixXd cov, MatrixXd dmean,
                         MatrixXd dcov)
    : mean_(std::move(mean)),
      cov_(std::move(cov)),
      track_(dmean.size() > 0 || dcov.size() > 0),
      dmean_(std::move(dmean)),
      dcov_(std::move(dcov)) {
  const int n = dim();
  if (cov_.rows() != n || cov_.cols() != n)
    throw DomainError("JointBelief: mean/cov dimension mismatch");
  if (track_ && (dmean_.rows() != n || dcov_.rows() != n * n ||
                 dcov_.cols() != dmean_.cols()))
    throw DomainError("JointBelief: Jacobian shape mismatch");
}

JointBelief::JointBelief(VectorXd mean, MatrixXd cov)
    : JointBelief(std::move(mean), std::move(cov), MatrixXd(), MatrixXd()) {}

VectorXd JointBelief::SubMean(const std::vector<int>& idx) const {
  return Gather(mean_, idx);
}

MatrixXd JointBelief::SubCov(const std::vector<int>& idx) const {
  return Gather(cov_, idx, idx);
}

MatrixXd JointBelief::SubDMean(const std::vector<int>& idx) const {
  return GatherRows(dmean_, idx);
}

MatrixXd JointBelief::SubDCov(const std::vector<int>& idx) const {
  return GatherCovRows(dcov_, dim(), idx);
}

std::vector<int> JointBelief::Append(const std::vector<int>& inputs,
                                     const StageMoments& stage,
                                     int param_offset) {
  const int n = dim();
  const int k = static_cast<int>(inputs.size());
  const int o = stage.output_dim();
  if (stage.input_dim() != k)
    throw DomainError("JointBelief::Append: stage input dimension mismatch");
  const int n2 = n + o;

  // cov[z, out] for every existing variable z.
  MatrixXd cross(n, o);
  {
    MatrixXd cov_in(n, k);
    for (int s = 0; s < k; ++s) cov_in.col(s) = cov_.col(inputs[s]);
    cross = cov_in * stage.coef;
  }

  VectorXd mean2(n2);
  mean2 << mean_, stage.mean;
  MatrixXd cov2(n2, n2);
  cov2.topLeftCorner(n, n) = cov_;
  cov2.topRightCorner(n, o) = cross;
  cov2.bottomLeftCorner(o, n) = cross.transpose();
  cov2.bottomRightCorner(o, o) = stage.cov;

  std::vector<int> out_idx(o);
  for (int a = 0; a < o; ++a) out_idx[a] = n + a;

  if (!track_) {
    mean_ = std::move(mean2);
    cov_ = std::move(cov2);
    return out_idx;
  }
  if (!stage.has_derivatives)
    throw DomainError("JointBelief::Append: stage lacks derivatives");

  const int nb = num_columns();
  const MatrixXd dm_in = SubDMean(inputs);
  const MatrixXd ds_in = SubDCov(inputs);

  MatrixXd d_mean = stage.dmean_dm * dm_in + stage.dmean_ds * ds_in;
  MatrixXd d_cov = stage.dcov_dm * dm_in + stage.dcov_ds * ds_in;
  MatrixXd d_coef = stage.dcoef_dm * dm_in + stage.dcoef_ds * ds_in;
  const int np = stage.num_params();
  if (np > 0) {
    if (param_offset < 0 || param_offset + np > nb)
      throw DomainError("JointBelief::Append: parameter columns out of range");
    d_mean.middleCols(param_offset, np) += stage.dmean_dp;
    d_cov.middleCols(param_offset, np) += stage.dcov_dp;
    d_coef.middleCols(param_offset, np) += stage.dcoef_dp;
  }

  // d cross_ra = sum_s d cov(r, in_s) coef_sa + cov(r, in_s) d coef_sa.
  MatrixXd d_cross = MatrixXd::Zero(n * o, nb);
  for (int r = 0; r < n; ++r) {
    for (int a = 0; a < o; ++a) {
      auto row = d_cross.row(Flat(r, a, o));
      for (int s = 0; s < k; ++s) {
        const double c = stage.coef(s, a);
        if (c != 0.0) row += c * dcov_.row(Flat(r, inputs[s], n));
        const double v = cov_(r, inputs[s]);
        if (v != 0.0) row += v * d_coef.row(Flat(s, a, o));
      }
    }
  }

  MatrixXd dmean2(n2, nb);
  dmean2.topRows(n) = dmean_;
  dmean2.bottomRows(o) = d_mean;
  MatrixXd dcov2(n2 * n2, nb);
  for (int i = 0; i < n; ++i) {
    dcov2.middleRows(i * n2, n) = dcov_.middleRows(i * n, n);
    for (int a = 0; a < o; ++a) {
      dcov2.row(Flat(i, n + a, n2)) = d_cross.row(Flat(i, a, o));
      dcov2.row(Flat(n + a, i, n2)) = d_cross.row(Flat(i, a, o));
    }
  }
  for (int a = 0; a < o; ++a)
    for (int b = 0; b < o; ++b)
      dcov2.row(Flat(n + a, n + b, n2)) = d_cov.row(Flat(a, b, o));

  mean_ = std::move(mean2);
  cov_ = std::move(cov2);
  dmean_ = std::move(dmean2);
  dcov_ = std::move(dcov2);
  return out_idx;
}

std::vector<int> AppendTrigFeatures(const TrigFeatures& trig,
                                    const std::vector<int>& state_idx,
                                    JointBelief* joint) {
  if (static_cast<int>(state_idx.size()) != trig.state_dim())
    throw DomainError("AppendTrigFeatures: state dimension mismatch");
  std::vector<int> out;
  for (int d : trig.plain_dims()) out.push_back(state_idx[d]);
  if (trig.angle_dims().empty()) return out;
  std::vector<int> angles;
  for (int d : trig.angle_dims()) angles.push_back(state_idx[d]);
  const std::vector<int> added = joint->Append(
      angles, PropagateSin(trig.AngleMap(), joint->SubMean(angles),
                           joint->SubCov(angles), joint->tracks_derivatives()));
  out.insert(out.end(), added.begin(), added.end());
  return out;
}

}  // namespace pilco
