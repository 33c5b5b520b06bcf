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

#include "pilco/gp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace pilco {

VectorXd GpHyperparams::ToLog() const {
  const int q = input_dim();
  VectorXd out(q + 2);
  out.head(q) = length_scales.array().log();
  out(q) = 0.5 * std::log(signal_var);
  out(q + 1) = 0.5 * std::log(noise_var);
  return out;
}

GpHyperparams GpHyperparams::FromLog(const VectorXd& log_params) {
  const int q = static_cast<int>(log_params.size()) - 2;
  GpHyperparams hp;
  hp.length_scales = log_params.head(q).array().exp();
  hp.signal_var = std::exp(2.0 * log_params(q));
  hp.noise_var = std::exp(2.0 * log_params(q + 1));
  return hp;
}

namespace {

void CheckHyperparams(const GpHyperparams& hp, int dim) {
  if (hp.input_dim() != dim)
    throw DomainError("GP: hyperparameter/input dimension mismatch");
  if (!(hp.signal_var > 0.0) || !(hp.noise_var > 0.0) ||
      !(hp.length_scales.array() > 0.0).all())
    throw DomainError("GP: hyperparameters must be positive");
}

}  // namespace

double SeKernel(const VectorXd& xa, const VectorXd& xb, const GpHyperparams& hp,
                bool same_point) {
  if (xa.size() != hp.input_dim() || xb.size() != hp.input_dim())
    throw DomainError("SeKernel: dimension mismatch");
  const double d2 =
      ((xa - xb).array() / hp.length_scales.array()).square().sum();
  return hp.signal_var * std::exp(-0.5 * d2) +
         (same_point ? hp.noise_var : 0.0);
}

MatrixXd SeKernelMatrix(const MatrixXd& a, const MatrixXd& b,
                        const GpHyperparams& hp) {
  const VectorXd inv_l = hp.length_scales.cwiseInverse();
  const MatrixXd as = a * inv_l.asDiagonal();
  const MatrixXd bs = b * inv_l.asDiagonal();
  MatrixXd d2 = (-2.0 * as * bs.transpose()).eval();
  d2.colwise() += as.rowwise().squaredNorm();
  d2.rowwise() += bs.rowwise().squaredNorm().transpose();
  return hp.signal_var * (-0.5 * d2.cwiseMax(0.0)).array().exp().matrix();
}

EvidenceResult LogEvidence(const MatrixXd& inputs, const VectorXd& targets,
                           const GpHyperparams& hp) {
  const int n = static_cast<int>(inputs.rows());
  const int q = static_cast<int>(inputs.cols());
  CheckHyperparams(hp, q);
  if (targets.size() != n) throw DomainError("LogEvidence: size mismatch");

  const MatrixXd k = SeKernelMatrix(inputs, inputs, hp);
  MatrixXd ky = k;
  ky.diagonal().array() += hp.noise_var;
  Eigen::LLT<MatrixXd> llt;
  if (!CholeskyWithJitter(ky, &llt))
    throw NumericalError("LogEvidence: kernel matrix not PD after jitter");
  const VectorXd alpha = llt.solve(targets);

  EvidenceResult res;
  res.value = -0.5 * targets.dot(alpha) - 0.5 * LogDet(llt) -
              0.5 * n * std::log(2.0 * std::numbers::pi);

  // dL/dtheta = 1/2 tr(W dKy/dtheta), W = alpha alpha^T - Ky^{-1}.
  MatrixXd w = llt.solve(MatrixXd::Identity(n, n));
  w = alpha * alpha.transpose() - w;
  const MatrixXd wk = w.cwiseProduct(k);
  res.gradient.resize(q + 2);
  for (int d = 0; d < q; ++d) {
    const VectorXd c = inputs.col(d) / hp.length_scales(d);
    double g = 0.0;
    for (int j = 0; j < n; ++j)
      g += (wk.col(j).array() * (c.array() - c(j)).square()).sum();
    res.gradient(d) = 0.5 * g;
  }
  res.gradient(q) = wk.sum();
  res.gradient(q + 1) = hp.noise_var * w.trace();
  return res;
}

GpModel GpModel::Build(const MatrixXd& inputs, const MatrixXd& targets,
                       const std::vector<GpHyperparams>& hps) {
  const int n = static_cast<int>(inputs.rows());
  if (targets.rows() != n)
    throw DomainError("GpModel::Build: inputs/targets row mismatch");
  if (static_cast<int>(hps.size()) != targets.cols())
    throw DomainError("GpModel::Build: one hyperparameter set per output");
  GpModel model;
  model.inputs_ = inputs;
  model.targets_ = targets;
  for (int a = 0; a < targets.cols(); ++a) {
    CheckHyperparams(hps[a], static_cast<int>(inputs.cols()));
    GpOutput out;
    out.hp = hps[a];
    MatrixXd ky = SeKernelMatrix(inputs, inputs, out.hp);
    ky.diagonal().array() += out.hp.noise_var;
    Eigen::LLT<MatrixXd> llt;
    if (!CholeskyWithJitter(ky, &llt, &out.jitter))
      throw NumericalError("GP Cholesky failed for output dimension " +
                           std::to_string(a));
    out.chol = llt.matrixL();
    out.beta = llt.solve(targets.col(a));
    out.k_inv = llt.solve(MatrixXd::Identity(n, n));
    out.k_inv = Symmetrized(out.k_inv);
    model.outputs_.push_back(std::move(out));
  }
  return model;
}

std::vector<GpHyperparams> GpModel::hyperparams() const {
  std::vector<GpHyperparams> out;
  for (const auto& o : outputs_) out.push_back(o.hp);
  return out;
}

GpHyperparams DefaultInit(const MatrixXd& inputs, const VectorXd& targets) {
  const int n = static_cast<int>(inputs.rows());
  GpHyperparams hp;
  const VectorXd mean = inputs.colwise().mean();
  hp.length_scales =
      ((inputs.rowwise() - mean.transpose()).colwise().squaredNorm() /
       std::max(n - 1, 1))
          .transpose()
          .cwiseSqrt();
  for (int d = 0; d < hp.length_scales.size(); ++d)
    if (!(hp.length_scales(d) > 1e-8)) hp.length_scales(d) = 1.0;
  const double tv =
      (targets.array() - targets.mean()).square().sum() / std::max(n - 1, 1);
  hp.signal_var = tv > 1e-12 ? tv : 1e-6;
  hp.noise_var = 0.01 * hp.signal_var;
  return hp;
}

GpModel Fit(const MatrixXd& inputs, const MatrixXd& targets,
            const std::vector<GpHyperparams>& init, const FitOptions& options) {
  const int n = static_cast<int>(inputs.rows());
  const int e = static_cast<int>(targets.cols());
  if (n < 2) throw DomainError("GP fit: need at least two points");
  if (targets.rows() != n) throw DomainError("GP fit: row mismatch");
  if (!init.empty() && static_cast<int>(init.size()) != e)
    throw DomainError("GP fit: one init per output dimension");
  if (options.restarts < 1) throw DomainError("GP fit: restarts must be >= 1");

  std::vector<GpHyperparams> best_hps;
  for (int a = 0; a < e; ++a) {
    const VectorXd y = targets.col(a);
    const VectorXd log_default = DefaultInit(inputs, y).ToLog();
    const VectorXd log0 = init.empty() ? log_default : init[a].ToLog();
    std::mt19937_64 rng(options.seed * 1000003ULL + static_cast<unsigned>(a));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    const Objective neg_evidence = [&](const VectorXd& lp, VectorXd* grad) {
      // Underflowed variances are reported as numerical failures so the
      // line search backtracks instead of aborting the fit.
      if (!(lp.array().abs() < 300.0).all())
        throw NumericalError("GP fit: log-hyperparameter out of range");
      const EvidenceResult r =
          LogEvidence(inputs, y, GpHyperparams::FromLog(lp));
      *grad = -r.gradient;
      return -r.value;
    };

    double best = -std::numeric_limits<double>::infinity();
    VectorXd best_lp;
    for (int r = 0; r < options.restarts; ++r) {
      // A warm start whose noise variance collapsed has a vanishing
      // log-noise gradient, so later restarts start from the default.
      VectorXd lp = r == 0 ? log0 : log_default;
      const bool perturb = r > 1 || (r == 1 && init.empty());
      if (perturb)
        for (int i = 0; i < lp.size(); ++i) lp(i) += unif(rng);
      const OptimResult res = Minimize(neg_evidence, lp, options.optim);
      if (res.status == OptimStatus::kNonFinite) continue;
      if (-res.value > best) {
        best = -res.value;
        best_lp = res.x;
      }
    }
    if (best_lp.size() == 0)
      throw NumericalError("GP fit failed for output dimension " +
                           std::to_string(a));
    best_hps.push_back(GpHyperparams::FromLog(best_lp));
  }
  return GpModel::Build(inputs, targets, best_hps);
}

PointPrediction PredictPoint(const GpModel& model, const VectorXd& xq) {
  if (xq.size() != model.input_dim())
    throw DomainError("PredictPoint: dimension mismatch");
  const int e = model.output_dim();
  PointPrediction p;
  p.mean.resize(e);
  p.var.resize(e);
  p.latent_var.resize(e);
  for (int a = 0; a < e; ++a) {
    const GpOutput& out = model.output(a);
    const VectorXd ks =
        SeKernelMatrix(model.inputs(), xq.transpose(), out.hp).col(0);
    p.mean(a) = ks.dot(out.beta);
    const VectorXd v = out.chol.triangularView<Eigen::Lower>().solve(ks);
    double latent = out.hp.signal_var - v.squaredNorm();
    if (latent < 0.0) {
      if (latent < -1e-8 * out.hp.signal_var)
        throw NumericalError("PredictPoint: negative predictive variance");
      latent = 0.0;
    }
    p.latent_var(a) = latent;
    p.var(a) = latent + out.hp.noise_var;
  }
  return p;
}

}  // namespace pilco
