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

// Independent oracles for the closed forms: random problem generators,
// Monte Carlo moment estimates with standard errors, and finite
// differences by Ridders' extrapolation.

#ifndef PILCO_VERIFICATION_H_
#define PILCO_VERIFICATION_H_

#include <functional>
#include <random>

#include "pilco/cost.h"
#include "pilco/gp.h"
#include "pilco/policy.h"
#include "pilco/rollout.h"

namespace pilco::verify {

using Rng = std::mt19937_64;

double Uniform(Rng* rng, double lo, double hi);
VectorXd RandomVector(Rng* rng, int n, double lo, double hi);
VectorXd Normal(Rng* rng, int n);

// Random PSD matrix with eigenvalues in [lo, hi].
MatrixXd RandomCov(Rng* rng, int n, double lo, double hi);

// Random GP model with SE hyperparameters in moderate ranges.
GpModel RandomModel(Rng* rng, int q, int e, int n);

// Draws from N(mean, cov) through a symmetric square root (cov may be
// singular).
class GaussianSampler {
 public:
  GaussianSampler(const VectorXd& mean, const MatrixXd& cov);
  VectorXd Draw(Rng* rng) const;

 private:
  VectorXd mean_;
  MatrixXd root_;
};

// Sample mean and covariance with standard errors of every entry (fourth
// moments estimated from the samples themselves).
class MomentSe {
 public:
  MomentSe(int dim, long capacity) : samples_(capacity, dim) {}

  void Add(const VectorXd& x) { samples_.row(n_++) = x.transpose(); }

  struct Result {
    VectorXd mean, mean_se;
    MatrixXd cov, cov_se;
  };

  Result Compute() const;

 private:
  MatrixXd samples_;
  long n_ = 0;
};

// One draw of f(x_i) + noise per row of `inputs` from the pointwise
// posterior (latent variance omitted when `with_model_variance` is false).
MatrixXd SampleGpOutputs(const GpModel& model, const MatrixXd& inputs,
                         bool with_model_variance, Rng* rng);

// Monte Carlo oracle for a GP prediction at a Gaussian input: draws x, then
// f(x) + noise from the pointwise posterior (latent variance omitted when
// `with_model_variance` is false). Returns moments over [x, delta].
MomentSe::Result McPredict(const GpModel& model, const VectorXd& mean,
                           const MatrixXd& cov, long samples,
                           bool with_model_variance, Rng* rng);

// Ridders' extrapolation of central differences: a tableau over steps
// h0, h0/1.4, ..., keeping per output element the estimate with the smallest
// error estimate. Large initial steps stay accurate through extrapolation,
// which keeps round-off in f from dominating small derivatives.
VectorXd RiddersColumn(const std::function<VectorXd(double)>& central,
                       double h0);

MatrixXd FdJacobian(const std::function<VectorXd(const VectorXd&)>& f,
                    const VectorXd& x, double h0 = 1e-2);

// Jacobian with respect to a symmetric matrix argument, using the
// convention of linalg.h: S_pq and S_qp are moved together and the
// off-diagonal quotient is halved. h0 must keep s +- h0 PSD.
MatrixXd FdCovJacobian(const std::function<VectorXd(const MatrixXd&)>& f,
                       const MatrixXd& s, double h0 = 1e-3);

// Largest elementwise relative error over entries with magnitude above
// `floor`; entries below it must agree in absolute terms within floor.
double MaxRelErr(const MatrixXd& analytic, const MatrixXd& oracle,
                 double floor = 1e-8);

// Elementwise |a - b| / max(|b|, floor): entries below the floor are held
// to an absolute error of tol * floor instead of a relative one.
double ScaledRelErr(const MatrixXd& analytic, const MatrixXd& oracle,
                    double floor);

// Small random closed-loop system: a 3-D state with one angle, a random GP
// dynamics model on [features, u], a random linear cost map.
struct RandomSystem {
  TrigFeatures features;
  GpModel model;
  CostSpaceMap cost_map;
  CostConfig cost;
  GaussianBelief initial;
  VectorXd u_max;

  RolloutSetup Setup(InferenceMethod method) const;
};

RandomSystem MakeRandomSystem(Rng* rng);

// Rbf policy with centers drawn near the initial belief; 3 basis functions
// on 4 features and one control give 19 parameters.
Policy RandomRbfPolicy(const RandomSystem& sys, int basis, Rng* rng);
Policy RandomLinearPolicy(const RandomSystem& sys, Rng* rng);

// dJ/dtheta by finite differences of the full rollout cost.
MatrixXd FdRolloutGradient(const RolloutEngine& engine, const Policy& policy,
                           const GaussianBelief& initial, int horizon,
                           double h0 = 1e-2);

}  // namespace pilco::verify

#endif  // PILCO_VERIFICATION_H_
