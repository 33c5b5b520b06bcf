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

// Gaussian beliefs and closed-form moments of sines and cosines of Gaussian
// variables.

#ifndef PILCO_GAUSSIAN_H_
#define PILCO_GAUSSIAN_H_

#include <vector>

#include "pilco/linalg.h"

namespace pilco {

// Mean and covariance of a Gaussian. The covariance is symmetrized on
// construction and must be PSD: eigenvalues >= -1e-10 * trace.
class GaussianBelief {
 public:
  GaussianBelief() = default;
  GaussianBelief(VectorXd mean, MatrixXd cov);

  // Zero-covariance belief at `mean`.
  static GaussianBelief Point(const VectorXd& mean);

  int dim() const { return static_cast<int>(mean_.size()); }
  const VectorXd& mean() const { return mean_; }
  const MatrixXd& cov() const { return cov_; }

 private:
  VectorXd mean_;
  MatrixXd cov_;
};

// Throws DomainError unless `cov` is square, symmetric within 1e-12 relative
// tolerance and PSD within -1e-10 * trace.
void CheckCovariance(const MatrixXd& cov, const char* what);

struct TrigMoments {
  double e_sin;
  double e_cos;
};

// E[sin(kx)], E[cos(kx)] for x ~ N(mu, var).
TrigMoments TrigMean(double mu, double var, int k = 1);

struct TrigSecondMoments {
  double e_sin2;
  double e_cos2;
  double e_sincos;
};

// E[sin^2 x], E[cos^2 x], E[sin x cos x] for x ~ N(mu, var).
TrigSecondMoments TrigSecond(double mu, double var);

// E[sin(ka za) sin(kb zb)] for (za, zb) ~ N(mean, cov), cov 2 x 2 PSD.
double JointSinSinMoment(const Eigen::Vector2d& mean,
                         const Eigen::Matrix2d& cov, int ka, int kb);

// Moments of a nonlinear or linear map applied to a Gaussian input
// x ~ N(m, S) with k = dim(x), o = output dim:
//   mean (o), cov (o x o), coef (k x o) with cov[x, output] = S * coef.
// Jacobians are flattened row-major (see linalg.h); `*_ds` columns are
// indexed by the flattened k x k input covariance. Parameter Jacobians are
// empty for stages without parameters.
struct StageMoments {
  VectorXd mean;
  MatrixXd cov;
  MatrixXd coef;

  bool has_derivatives = false;
  MatrixXd dmean_dm, dmean_ds;
  MatrixXd dcov_dm, dcov_ds;
  MatrixXd dcoef_dm, dcoef_ds;

  MatrixXd dmean_dp, dcov_dp, dcoef_dp;

  int input_dim() const { return static_cast<int>(coef.rows()); }
  int output_dim() const { return static_cast<int>(mean.size()); }
  int num_params() const { return static_cast<int>(dmean_dp.cols()); }
};

// out = weights * sin(lin * x + phase). Covers sin/cos feature
// augmentation (cos t = sin(t + pi/2)) and the trapezoidal squash
// (lin = [I; 3I], weights = [9/8 I, 1/8 I]).
struct SinMap {
  MatrixXd lin;      // k' x k
  VectorXd phase;    // k'
  MatrixXd weights;  // o x k'
};

StageMoments PropagateSin(const SinMap& map, const VectorXd& m,
                          const MatrixXd& s, bool derivatives);

// out = a * x + b.
StageMoments PropagateLinear(const MatrixXd& a, const VectorXd& b,
                             const VectorXd& m, const MatrixXd& s,
                             bool derivatives);

// Replaces each angle dimension by its (sin, cos) pair:
// [non-angle dims in order, sin a_1, cos a_1, sin a_2, cos a_2, ...].
class TrigFeatures {
 public:
  TrigFeatures() = default;
  TrigFeatures(int state_dim, std::vector<int> angle_dims);

  int state_dim() const { return state_dim_; }
  int feature_dim() const {
    return state_dim_ + static_cast<int>(angle_dims_.size());
  }
  const std::vector<int>& angle_dims() const { return angle_dims_; }
  const std::vector<int>& plain_dims() const { return plain_dims_; }

  // Deterministic feature map.
  VectorXd Apply(const VectorXd& x) const;

  // Map from the angle dims to the interleaved (sin, cos) outputs.
  SinMap AngleMap() const;

 private:
  int state_dim_ = 0;
  std::vector<int> angle_dims_;
  std::vector<int> plain_dims_;
};

}  // namespace pilco

#endif  // PILCO_GAUSSIAN_H_
