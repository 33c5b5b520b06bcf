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

// Bounded feedback policies u = u_max * squash(prelim(x)).
//
// Parameter layouts (flat vector theta):
//   linear: A (F x D_in, row-major), then b (F).
//   rbf:    centers (N x D_in, row-major), log length-scales (F x D_in,
//           row-major), targets (N x F, row-major).

#ifndef PILCO_POLICY_H_
#define PILCO_POLICY_H_

#include <string>
#include <vector>

#include "pilco/gaussian.h"
#include "pilco/inference.h"

namespace pilco {

enum class PolicyVariant { kLinear, kRbf };

std::string VariantName(PolicyVariant v);
PolicyVariant ParseVariant(const std::string& name);

// 9/8 sin z + 1/8 sin 3z.
double Squash(double z);

// Fixed hyperparameters of the rbf expansion.
inline constexpr double kRbfSignalVar = 1.0;
inline constexpr double kRbfNoiseVar = 0.01;

class Policy {
 public:
  Policy() = default;

  static Policy Linear(int input_dim, int control_dim, const VectorXd& u_max);
  static Policy Rbf(int input_dim, int control_dim, int num_basis,
                    const VectorXd& u_max);

  static int ParamCount(PolicyVariant variant, int input_dim, int control_dim,
                        int num_basis);

  PolicyVariant variant() const { return variant_; }
  int input_dim() const { return input_dim_; }
  int control_dim() const { return control_dim_; }
  int num_basis() const { return num_basis_; }
  int num_params() const { return static_cast<int>(theta_.size()); }
  const VectorXd& u_max() const { return u_max_; }
  const VectorXd& params() const { return theta_; }
  void SetParams(const VectorXd& theta);

  // Deterministic evaluation.
  VectorXd Prelim(const VectorXd& x) const;
  VectorXd Control(const VectorXd& x) const;

  // Moments of the preliminary (unsquashed) policy output for a Gaussian
  // input, with m/S Jacobians and parameter Jacobians (dmean_dp, ...) when
  // `derivatives` is set.
  StageMoments PrelimStage(const VectorXd& m, const MatrixXd& s,
                           bool derivatives) const;

  // Squash map for control limits u_max.
  static SinMap SquashMap(const VectorXd& u_max);

  // rbf accessors.
  MatrixXd centers() const;
  MatrixXd log_lengths() const;
  MatrixXd targets() const;
  // (K_a + noise I)^{-1} t_a as columns.
  const MatrixXd& alpha() const { return alpha_; }

 private:
  void Refresh();
  SeExpansion Expansion() const;

  PolicyVariant variant_ = PolicyVariant::kLinear;
  int input_dim_ = 0;
  int control_dim_ = 0;
  int num_basis_ = 0;
  VectorXd u_max_;
  VectorXd theta_;

  // rbf cache, refreshed on SetParams.
  MatrixXd alpha_;
  std::vector<Eigen::LLT<MatrixXd>> kn_llt_;
  std::vector<MatrixXd> kmat_;
};

// Moments of u for a Gaussian input, and cov[input, u].
struct ControlMoments {
  VectorXd u_mean;
  MatrixXd u_cov;
  MatrixXd state_control_cross_cov;  // D_in x F
  // Jacobians over the columns [input mean (D_in), input cov (D_in^2),
  // theta (P)]; rows row-major as in linalg.h.
  MatrixXd d_mean, d_cov, d_cross;
};

ControlMoments ComputeControlMoments(const Policy& policy,
                                     const GaussianBelief& input,
                                     bool derivatives);

// Squashed moments from prelim z ~ N(z_mean, z_cov) and cov[x, z].
ControlMoments SquashMoments(const VectorXd& z_mean, const MatrixXd& z_cov,
                             const MatrixXd& input_prelim_cross_cov,
                             const VectorXd& u_max);

}  // namespace pilco

#endif  // PILCO_POLICY_H_
