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

// Prediction of GP outputs at Gaussian-distributed inputs: exact moment
// matching and posterior-mean linearization, with derivatives of every
// output moment with respect to the input mean and covariance.
//
// Gradient storage is row-major: for E outputs and q inputs,
//   d_mean_d_input_mean      E x q         [a, r]
//   d_mean_d_input_cov       E x q*q       [a, p*q + q']
//   d_cov_d_input_mean       E*E x q       [a*E + b, r]
//   d_cov_d_input_cov        E*E x q*q
//   d_crosscov_d_input_mean  q*E x q       [r*E + a, s]  (cross-cov is q x E)
//   d_crosscov_d_input_cov   q*E x q*q
// Covariance derivatives follow the symmetric-gradient convention of
// linalg.h.

#ifndef PILCO_INFERENCE_H_
#define PILCO_INFERENCE_H_

#include <string>
#include <vector>

#include "pilco/gaussian.h"
#include "pilco/gp.h"

namespace pilco {

enum class InferenceMethod { kMomentMatch, kLinearize };

std::string MethodName(InferenceMethod method);
InferenceMethod ParseMethod(const std::string& name);

struct InferenceOptions {
  // When false, drops the model-uncertainty contribution (the expected
  // latent variance) and keeps the noise variance: a deterministic-mean
  // model.
  bool include_model_variance = true;
};

struct UncertainPrediction {
  VectorXd delta_mean;
  MatrixXd delta_cov;
  MatrixXd input_delta_cross_cov;  // q x E
};

struct InferenceGradients {
  MatrixXd d_mean_d_input_mean;
  MatrixXd d_mean_d_input_cov;
  MatrixXd d_cov_d_input_mean;
  MatrixXd d_cov_d_input_cov;
  MatrixXd d_crosscov_d_input_mean;
  MatrixXd d_crosscov_d_input_cov;
};

// Weighted sums of SE basis functions with shared centers:
//   f_a(x) = sum_i weights(i, a) * sf2_a * exp(-1/2 |x - c_i|^2_{Lambda_a})
// plus, optionally, the GP latent variance sf2_a - k^T K_a^{-1} k and noise.
struct SeExpansion {
  MatrixXd centers;             // n x q
  MatrixXd weights;             // n x E
  MatrixXd log_lengths;         // E x q
  VectorXd signal_var;          // E
  VectorXd noise_var;           // E (0 for a deterministic expansion)
  std::vector<MatrixXd> k_inv;  // per output, empty for deterministic

  int num_centers() const { return static_cast<int>(centers.rows()); }
  int input_dim() const { return static_cast<int>(centers.cols()); }
  int output_dim() const { return static_cast<int>(weights.cols()); }
  bool has_variance() const { return !k_inv.empty(); }

  static SeExpansion FromModel(const GpModel& model, bool with_variance);
};

// Parameter columns for SeMomentMatch: centers (n*q, row-major), then
// log length-scales (E*q, row-major), then weights (E*n, output-major:
// a * n + i).
int SeParamCount(const SeExpansion& ex);

// Exact moments of f(x) for x ~ N(m, s). `derivatives` fills the m/s
// Jacobians; `param_derivatives` fills dmean_dp/dcov_dp/dcoef_dp (only for
// expansions without the variance term).
StageMoments SeMomentMatch(const SeExpansion& ex, const VectorXd& m,
                           const MatrixXd& s, bool derivatives,
                           bool param_derivatives = false);

// Linearized moments of the expansion mean plus variance at the mean.
StageMoments SeLinearize(const SeExpansion& ex, const VectorXd& m,
                         const MatrixXd& s, bool derivatives);

// Stage for the dynamics model at an uncertain input.
StageMoments PredictStage(const GpModel& model, InferenceMethod method,
                          const InferenceOptions& options, const VectorXd& m,
                          const MatrixXd& s, bool derivatives);

UncertainPrediction MomentMatch(const GpModel& model,
                                const GaussianBelief& input,
                                const InferenceOptions& options = {});
UncertainPrediction LinearizePredict(const GpModel& model,
                                     const GaussianBelief& input,
                                     const InferenceOptions& options = {});
InferenceGradients MomentMatchGradients(const GpModel& model,
                                        const GaussianBelief& input,
                                        const InferenceOptions& options = {});
InferenceGradients LinearizeGradients(const GpModel& model,
                                      const GaussianBelief& input,
                                      const InferenceOptions& options = {});

}  // namespace pilco

#endif  // PILCO_INFERENCE_H_
