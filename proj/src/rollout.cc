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

#include "pilco/rollout.h"

#include <algorithm>
#include <string>
#include <utility>

#include "pilco/joint_belief.h"

namespace pilco {

RolloutDiverged::RolloutDiverged(int step, double trace)
    : NumericalError("rollout diverged at step " + std::to_string(step) +
                     " (covariance trace " + std::to_string(trace) + ")"),
      step_(step) {}

RolloutEngine::RolloutEngine(const GpModel& model, RolloutSetup setup)
    : setup_(std::move(setup)),
      dynamics_(
          SeExpansion::FromModel(model, setup_.options.include_model_variance)),
      state_dim_(setup_.features.state_dim()) {
  if (model.output_dim() != state_dim_)
    throw DomainError("RolloutEngine: model outputs must match state dim");
  if (setup_.cost_map.cost_dim() != setup_.cost.dim())
    throw DomainError("RolloutEngine: cost map/config dimension mismatch");
}

int RolloutEngine::model_input_dim(const Policy& policy) const {
  return (setup_.model_uses_features ? setup_.features.feature_dim()
                                     : state_dim_) +
         policy.control_dim();
}

void RolloutEngine::Advance(const Policy& policy, VectorXd* mean, MatrixXd* cov,
                            MatrixXd* dmean, MatrixXd* dcov,
                            int param_offset) const {
  const int d = state_dim_;
  if (policy.input_dim() != setup_.features.feature_dim())
    throw DomainError("rollout: policy input must match the feature dim");
  if (dynamics_.input_dim() != model_input_dim(policy))
    throw DomainError("rollout: model input dimension mismatch");
  const bool track = dmean != nullptr;
  JointBelief joint = track ? JointBelief(*mean, *cov, *dmean, *dcov)
                            : JointBelief(*mean, *cov);
  std::vector<int> x_idx(d);
  for (int i = 0; i < d; ++i) x_idx[i] = i;

  const std::vector<int> feat =
      AppendTrigFeatures(setup_.features, x_idx, &joint);
  const std::vector<int> z = joint.Append(
      feat, policy.PrelimStage(joint.SubMean(feat), joint.SubCov(feat), track),
      param_offset);
  const std::vector<int> u =
      joint.Append(z, PropagateSin(Policy::SquashMap(policy.u_max()),
                                   joint.SubMean(z), joint.SubCov(z), track));
  std::vector<int> in = setup_.model_uses_features ? feat : x_idx;
  in.insert(in.end(), u.begin(), u.end());
  const VectorXd m_in = joint.SubMean(in);
  const MatrixXd s_in = joint.SubCov(in);
  const std::vector<int> delta =
      joint.Append(in, setup_.method == InferenceMethod::kMomentMatch
                           ? SeMomentMatch(dynamics_, m_in, s_in, track)
                           : SeLinearize(dynamics_, m_in, s_in, track));

  const int n = joint.dim();
  const MatrixXd& jc = joint.cov();
  VectorXd m2(d);
  MatrixXd s2(d, d);
  for (int i = 0; i < d; ++i) {
    m2(i) = joint.mean()(i) + joint.mean()(delta[i]);
    for (int j = 0; j < d; ++j)
      s2(i, j) =
          jc(i, j) + jc(delta[i], delta[j]) + jc(i, delta[j]) + jc(delta[i], j);
  }
  *mean = m2;
  *cov = Symmetrized(s2);
  if (!track) return;

  const MatrixXd& jm = joint.dmean();
  const MatrixXd& jd = joint.dcov();
  MatrixXd dm2(d, jm.cols());
  MatrixXd ds2(d * d, jd.cols());
  for (int i = 0; i < d; ++i) {
    dm2.row(i) = jm.row(i) + jm.row(delta[i]);
    for (int j = 0; j < d; ++j)
      ds2.row(Flat(i, j, d)) =
          jd.row(Flat(i, j, n)) + jd.row(Flat(delta[i], delta[j], n)) +
          jd.row(Flat(i, delta[j], n)) + jd.row(Flat(delta[i], j, n));
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const auto avg =
          (0.5 * (ds2.row(Flat(i, j, d)) + ds2.row(Flat(j, i, d)))).eval();
      ds2.row(Flat(i, j, d)) = avg;
      ds2.row(Flat(j, i, d)) = avg;
    }
  }
  *dmean = std::move(dm2);
  *dcov = std::move(ds2);
}

StepResult RolloutEngine::Step(const Policy& policy,
                               const GaussianBelief& belief) const {
  const int d = state_dim_;
  if (belief.dim() != d) throw DomainError("Step: belief dimension mismatch");
  const int np = policy.num_params();
  const int nb = d + d * d + np;
  VectorXd mean = belief.mean();
  MatrixXd cov = belief.cov();
  MatrixXd dmean = MatrixXd::Zero(d, nb);
  dmean.leftCols(d).setIdentity();
  MatrixXd dcov = MatrixXd::Zero(d * d, nb);
  dcov.middleCols(d, d * d) = CovSeed(d);
  Advance(policy, &mean, &cov, &dmean, &dcov, d + d * d);
  return {GaussianBelief(mean, cov), std::move(dmean), std::move(dcov)};
}

double RolloutEngine::StepCost(const VectorXd& mean, const MatrixXd& cov,
                               const MatrixXd& dmean, const MatrixXd& dcov,
                               VectorXd* grad, double* std_out) const {
  const int d = state_dim_;
  const bool track = grad != nullptr;
  JointBelief joint =
      track ? JointBelief(mean, cov, dmean, dcov) : JointBelief(mean, cov);
  std::vector<int> x_idx(d);
  for (int i = 0; i < d; ++i) x_idx[i] = i;
  const std::vector<int> y = AppendCostSpace(setup_.cost_map, x_idx, &joint);
  const VectorXd my = joint.SubMean(y);
  const MatrixXd sy = joint.SubCov(y);
  const CostMoment ec = ExpectedCost(setup_.cost, my, sy);
  double value = ec.value;
  VectorXd gm = ec.d_mean;
  MatrixXd gs = ec.d_cov;
  const double kappa = setup_.cost.ucb_kappa;
  double sd = 0.0;
  if (kappa != 0.0 || std_out) {
    const CostMoment cs = CostStd(setup_.cost, my, sy);
    sd = cs.value;
    if (kappa != 0.0) {
      value += kappa * cs.value;
      gm += kappa * cs.d_mean;
      gs += kappa * cs.d_cov;
    }
  }
  if (std_out) *std_out = sd;
  if (track)
    *grad = (gm.transpose() * joint.SubDMean(y) +
             Vec(gs).transpose() * joint.SubDCov(y))
                .transpose();
  return value;
}

RolloutReport RolloutEngine::Rollout(const Policy& policy,
                                     const GaussianBelief& initial, int horizon,
                                     bool gradient) const {
  if (horizon < 1) throw DomainError("Rollout: horizon must be >= 1");
  const int d = state_dim_;
  if (initial.dim() != d) throw DomainError("Rollout: belief dimension");
  const int np = policy.num_params();
  VectorXd mean = initial.mean();
  MatrixXd cov = initial.cov();
  MatrixXd dmean, dcov;
  if (gradient) {
    dmean = MatrixXd::Zero(d, np);
    dcov = MatrixXd::Zero(d * d, np);
  }
  const double trace0 = std::max(cov.trace(), 1e-8);

  RolloutReport rep;
  if (gradient) rep.grad = VectorXd::Zero(np);
  auto add_cost = [&]() {
    VectorXd g;
    double sd = 0.0;
    const double c =
        StepCost(mean, cov, dmean, dcov, gradient ? &g : nullptr, &sd);
    rep.step_costs.push_back(c);
    rep.cost_std.push_back(sd);
    rep.total_cost += c;
    if (gradient) rep.grad += g;
  };
  rep.beliefs.emplace_back(mean, cov);
  add_cost();
  for (int t = 1; t <= horizon; ++t) {
    Advance(policy, &mean, &cov, gradient ? &dmean : nullptr,
            gradient ? &dcov : nullptr, 0);
    const double tr = cov.trace();
    if (!mean.allFinite() || !cov.allFinite() || !(tr <= 1e6 * trace0))
      throw RolloutDiverged(t, tr);
    rep.beliefs.emplace_back(mean, cov);
    add_cost();
  }
  return rep;
}

}  // namespace pilco
