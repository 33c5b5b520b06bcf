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

#include "pilco/cost.h"

#include <cmath>
#include <string>

namespace pilco {

CostConfig CostConfig::Selector(const VectorXd& target,
                                const VectorXd& selector, double sigma_c) {
  if (!(sigma_c > 0.0)) throw DomainError("CostConfig: sigma_c must be > 0");
  if (selector.size() != target.size())
    throw DomainError("CostConfig: selector dimension mismatch");
  CostConfig cfg;
  cfg.target = target;
  cfg.precision = MatrixXd(selector.asDiagonal()) / (sigma_c * sigma_c);
  cfg.sigma_c = sigma_c;
  return cfg;
}

double Cost(const CostConfig& cfg, const VectorXd& y) {
  const VectorXd d = y - cfg.target;
  return 1.0 - std::exp(-0.5 * d.dot(cfg.precision * d));
}

namespace {

// L = E[exp(-1/2 d^T W d)] with its gradients (mean, symmetric cov).
struct Overlap {
  double value;
  VectorXd d_mean;
  MatrixXd d_cov;
};

Overlap GaussianOverlap(const VectorXd& delta, const MatrixXd& cov,
                        const MatrixXd& w) {
  const int k = static_cast<int>(delta.size());
  const MatrixXd a = MatrixXd::Identity(k, k) + cov * w;
  const Eigen::PartialPivLU<MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw NumericalError("expected cost: I + Sigma W is singular (rcond " +
                         std::to_string(rcond) + ")");
  // S1 = W (I + Sigma W)^{-1} = (I + W Sigma)^{-1} W, symmetric.
  const Eigen::PartialPivLU<MatrixXd> lu_t(a.transpose());
  const MatrixXd s1 = Symmetrized(lu_t.solve(w.transpose()).transpose());
  const double det = lu.determinant();
  const VectorXd s1d = s1 * delta;
  Overlap o;
  o.value = std::exp(-0.5 * delta.dot(s1d)) / std::sqrt(det);
  o.d_mean = -o.value * s1d;
  o.d_cov = 0.5 * o.value * (s1d * s1d.transpose() - s1);
  return o;
}

void CheckBelief(const CostConfig& cfg, const VectorXd& mean,
                 const MatrixXd& cov) {
  if (mean.size() != cfg.dim() || cov.rows() != cfg.dim() ||
      cov.cols() != cfg.dim())
    throw DomainError("cost: belief dimension mismatch");
}

}  // namespace

CostMoment ExpectedCost(const CostConfig& cfg, const VectorXd& mean,
                        const MatrixXd& cov) {
  CheckBelief(cfg, mean, cov);
  const Overlap l = GaussianOverlap(mean - cfg.target, cov, cfg.precision);
  return {1.0 - l.value, -l.d_mean, -l.d_cov};
}

CostMoment ExpectedCost(const CostConfig& cfg, const GaussianBelief& belief) {
  return ExpectedCost(cfg, belief.mean(), belief.cov());
}

CostMoment CostStd(const CostConfig& cfg, const VectorXd& mean,
                   const MatrixXd& cov) {
  CheckBelief(cfg, mean, cov);
  // Var[c] = Var[exp(-1/2 d^T W d)] = E[exp(-1/2 d^T (2W) d)] - L^2.
  const VectorXd delta = mean - cfg.target;
  const Overlap l1 = GaussianOverlap(delta, cov, cfg.precision);
  const Overlap l2 = GaussianOverlap(delta, cov, 2.0 * cfg.precision);
  const double var = l2.value - l1.value * l1.value;
  CostMoment out;
  const int k = cfg.dim();
  // A point belief has zero spread; the difference above only carries
  // round-off there.
  if (!(var > 0.0) || cov.isZero(0.0)) {
    out.value = 0.0;
    out.d_mean = VectorXd::Zero(k);
    out.d_cov = MatrixXd::Zero(k, k);
    return out;
  }
  out.value = std::sqrt(var);
  out.d_mean = (l2.d_mean - 2.0 * l1.value * l1.d_mean) / (2.0 * out.value);
  out.d_cov = (l2.d_cov - 2.0 * l1.value * l1.d_cov) / (2.0 * out.value);
  return out;
}

CostMoment CostStd(const CostConfig& cfg, const GaussianBelief& belief) {
  return CostStd(cfg, belief.mean(), belief.cov());
}

VectorXd CostSpaceMap::Apply(const VectorXd& x) const {
  return lin * trig.Apply(x) + offset;
}

std::vector<int> AppendCostSpace(const CostSpaceMap& map,
                                 const std::vector<int>& state_idx,
                                 JointBelief* joint) {
  const std::vector<int> feat = AppendTrigFeatures(map.trig, state_idx, joint);
  return joint->Append(
      feat, PropagateLinear(map.lin, map.offset, joint->SubMean(feat),
                            joint->SubCov(feat), joint->tracks_derivatives()));
}

GaussianBelief MapToCostSpace(const CostSpaceMap& map,
                              const GaussianBelief& state) {
  JointBelief joint(state.mean(), state.cov());
  std::vector<int> idx(state.dim());
  for (int i = 0; i < state.dim(); ++i) idx[i] = i;
  const std::vector<int> y = AppendCostSpace(map, idx, &joint);
  return GaussianBelief(joint.SubMean(y), joint.SubCov(y));
}

}  // namespace pilco
