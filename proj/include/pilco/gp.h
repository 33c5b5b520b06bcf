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

// Multi-output Gaussian-process regression with squared-exponential ARD
// kernels: one independent GP per target dimension, zero prior mean.

#ifndef PILCO_GP_H_
#define PILCO_GP_H_

#include <cstdint>
#include <vector>

#include "pilco/linalg.h"
#include "pilco/optimizer.h"

namespace pilco {

struct GpHyperparams {
  VectorXd length_scales;
  double signal_var = 1.0;
  double noise_var = 1.0;

  int input_dim() const { return static_cast<int>(length_scales.size()); }

  // [log l_1..log l_q, log sigma_f, log sigma_w].
  VectorXd ToLog() const;
  static GpHyperparams FromLog(const VectorXd& log_params);
};

// SE kernel; adds noise_var when `same_point` is set.
double SeKernel(const VectorXd& xa, const VectorXd& xb, const GpHyperparams& hp,
                bool same_point);

// Kernel matrix k(a_i, b_j) without the noise term.
MatrixXd SeKernelMatrix(const MatrixXd& a, const MatrixXd& b,
                        const GpHyperparams& hp);

struct EvidenceResult {
  double value;
  VectorXd gradient;  // w.r.t. GpHyperparams::ToLog()
};

// log N(y | 0, K + noise_var I) and its gradient in log-hyperparameter
// space.
EvidenceResult LogEvidence(const MatrixXd& inputs, const VectorXd& targets,
                           const GpHyperparams& hp);

// One trained output dimension.
struct GpOutput {
  GpHyperparams hp;
  MatrixXd chol;   // lower factor of K + noise_var I (+ jitter)
  VectorXd beta;   // (K + noise_var I)^{-1} y
  MatrixXd k_inv;  // (K + noise_var I)^{-1}
  double jitter = 0.0;
};

class GpModel {
 public:
  GpModel() = default;

  // Conditions one GP per target column on (inputs, targets) with the given
  // hyperparameters.
  static GpModel Build(const MatrixXd& inputs, const MatrixXd& targets,
                       const std::vector<GpHyperparams>& hps);

  int num_points() const { return static_cast<int>(inputs_.rows()); }
  int input_dim() const { return static_cast<int>(inputs_.cols()); }
  int output_dim() const { return static_cast<int>(outputs_.size()); }
  const MatrixXd& inputs() const { return inputs_; }
  const MatrixXd& targets() const { return targets_; }
  const GpOutput& output(int a) const { return outputs_[a]; }
  std::vector<GpHyperparams> hyperparams() const;

 private:
  MatrixXd inputs_;
  MatrixXd targets_;
  std::vector<GpOutput> outputs_;
};

struct FitOptions {
  int restarts = 3;
  std::uint64_t seed = 0;
  OptimSettings optim = {.max_iters = 200, .grad_tol = 1e-6};
};

// Scale-aware initial hyperparameters for output column `a`: length-scales
// = per-input standard deviation, signal variance = target variance, noise
// variance = 1% of target variance.
GpHyperparams DefaultInit(const MatrixXd& inputs, const VectorXd& targets);

// Maximizes the evidence per output dimension from `init` (one entry per
// output; empty uses DefaultInit). Restart 0 starts at init. With an
// explicit init, restart 1 starts at DefaultInit. Remaining restarts perturb
// each DefaultInit log-hyperparameter by a uniform offset in [-1, 1]. The
// best evidence wins.
GpModel Fit(const MatrixXd& inputs, const MatrixXd& targets,
            const std::vector<GpHyperparams>& init, const FitOptions& options);

struct PointPrediction {
  VectorXd mean;
  VectorXd var;         // latent variance + noise_var
  VectorXd latent_var;  // k** - k*^T (K + noise I)^{-1} k*
};

PointPrediction PredictPoint(const GpModel& model, const VectorXd& xq);

}  // namespace pilco

#endif  // PILCO_GP_H_
