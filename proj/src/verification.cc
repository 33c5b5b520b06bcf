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

#include "pilco/verification.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pilco::verify {

double Uniform(Rng* rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(*rng);
}

VectorXd RandomVector(Rng* rng, int n, double lo, double hi) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = Uniform(rng, lo, hi);
  return v;
}

VectorXd Normal(Rng* rng, int n) {
  std::normal_distribution<double> nd;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(*rng);
  return v;
}

MatrixXd RandomCov(Rng* rng, int n, double lo, double hi) {
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Uniform(rng, -1.0, 1.0);
  const Eigen::HouseholderQR<MatrixXd> qr(a);
  const MatrixXd q = qr.householderQ();
  const VectorXd ev = RandomVector(rng, n, lo, hi);
  return Symmetrized(q * ev.asDiagonal() * q.transpose());
}

GpModel RandomModel(Rng* rng, int q, int e, int n) {
  MatrixXd x(n, q);
  for (int i = 0; i < n; ++i) x.row(i) = RandomVector(rng, q, -2.0, 2.0);
  MatrixXd y(n, e);
  std::vector<GpHyperparams> hps;
  for (int a = 0; a < e; ++a) {
    GpHyperparams hp;
    hp.length_scales = RandomVector(rng, q, 0.6, 2.0);
    hp.signal_var = Uniform(rng, 0.3, 1.5);
    hp.noise_var = Uniform(rng, 0.01, 0.1);
    for (int i = 0; i < n; ++i)
      y(i, a) = std::sin(1.3 * x(i, 0) + a) + 0.3 * x.row(i).sum() +
                0.1 * Uniform(rng, -1.0, 1.0);
    hps.push_back(hp);
  }
  return GpModel::Build(x, y, hps);
}

GaussianSampler::GaussianSampler(const VectorXd& mean, const MatrixXd& cov)
    : mean_(mean) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  root_ = es.eigenvectors() *
          es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

VectorXd GaussianSampler::Draw(Rng* rng) const {
  return mean_ + root_ * Normal(rng, static_cast<int>(mean_.size()));
}

MomentSe::Result MomentSe::Compute() const {
  const auto s = samples_.topRows(n_);
  const int dim = static_cast<int>(s.cols());
  Result r;
  r.mean = s.colwise().mean().transpose();
  const MatrixXd d = s.rowwise() - r.mean.transpose();
  r.cov = d.transpose() * d / (n_ - 1);
  r.mean_se = (r.cov.diagonal() / n_).cwiseSqrt();
  r.cov_se.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const Eigen::ArrayXd p = d.col(i).array() * d.col(j).array();
      const double var = (p - r.cov(i, j)).square().sum() / (n_ - 1);
      r.cov_se(i, j) = std::sqrt(var / n_);
    }
  }
  return r;
}

MatrixXd SampleGpOutputs(const GpModel& model, const MatrixXd& inputs,
                         bool with_model_variance, Rng* rng) {
  const long nb = inputs.rows();
  MatrixXd out(nb, model.output_dim());
  for (int a = 0; a < model.output_dim(); ++a) {
    const GpOutput& o = model.output(a);
    const MatrixXd ks = SeKernelMatrix(model.inputs(), inputs, o.hp);
    const VectorXd m = ks.transpose() * o.beta;
    const MatrixXd v = o.chol.triangularView<Eigen::Lower>().solve(ks);
    const VectorXd latent =
        (o.hp.signal_var - v.colwise().squaredNorm().array())
            .cwiseMax(0.0)
            .matrix()
            .transpose();
    for (long i = 0; i < nb; ++i) {
      const double var =
          o.hp.noise_var + (with_model_variance ? latent(i) : 0.0);
      out(i, a) = m(i) + std::sqrt(var) * Normal(rng, 1)(0);
    }
  }
  return out;
}

MomentSe::Result McPredict(const GpModel& model, const VectorXd& mean,
                           const MatrixXd& cov, long samples,
                           bool with_model_variance, Rng* rng) {
  const int q = model.input_dim(), e = model.output_dim();
  const GaussianSampler sampler(mean, cov);
  MomentSe acc(q + e, samples);
  const long batch = 2000;
  MatrixXd xs(batch, q);
  for (long done = 0; done < samples; done += batch) {
    const long nb = std::min(batch, samples - done);
    for (long i = 0; i < nb; ++i) xs.row(i) = sampler.Draw(rng).transpose();
    const MatrixXd out =
        SampleGpOutputs(model, xs.topRows(nb), with_model_variance, rng);
    for (long i = 0; i < nb; ++i) {
      VectorXd z(q + e);
      z << xs.row(i).transpose(), out.row(i).transpose();
      acc.Add(z);
    }
  }
  return acc.Compute();
}

VectorXd RiddersColumn(const std::function<VectorXd(double)>& central,
                       double h0) {
  constexpr int kLevels = 10;
  constexpr double kCon = 1.4, kCon2 = kCon * kCon;
  std::vector<std::vector<VectorXd>> a(kLevels);
  VectorXd best, best_err;
  double h = h0;
  for (int i = 0; i < kLevels; ++i, h /= kCon) {
    a[i].push_back(central(h));
    if (i == 0) {
      best = a[0][0];
      best_err = VectorXd::Constant(best.size(),
                                    std::numeric_limits<double>::infinity());
      continue;
    }
    double fac = kCon2;
    for (int k = 1; k <= i; ++k, fac *= kCon2) {
      a[i].push_back((a[i][k - 1] * fac - a[i - 1][k - 1]) / (fac - 1.0));
      const VectorXd err =
          (a[i][k] - a[i][k - 1])
              .cwiseAbs()
              .cwiseMax((a[i][k] - a[i - 1][k - 1]).cwiseAbs());
      for (int e = 0; e < err.size(); ++e) {
        if (err(e) <= best_err(e)) {
          best_err(e) = err(e);
          best(e) = a[i][k](e);
        }
      }
    }
  }
  return best;
}

MatrixXd FdJacobian(const std::function<VectorXd(const VectorXd&)>& f,
                    const VectorXd& x, double h0) {
  const int n = static_cast<int>(x.size());
  const VectorXd f0 = f(x);
  MatrixXd jac(f0.size(), n);
  for (int j = 0; j < n; ++j) {
    jac.col(j) = RiddersColumn(
        [&](double step) {
          VectorXd xp = x, xm = x;
          xp(j) += step;
          xm(j) -= step;
          return VectorXd((f(xp) - f(xm)) / (2.0 * step));
        },
        h0);
  }
  return jac;
}

MatrixXd FdCovJacobian(const std::function<VectorXd(const MatrixXd&)>& f,
                       const MatrixXd& s, double h0) {
  const int k = static_cast<int>(s.rows());
  const VectorXd f0 = f(s);
  MatrixXd jac(f0.size(), k * k);
  for (int p = 0; p < k; ++p) {
    for (int q = 0; q < k; ++q) {
      VectorXd col = RiddersColumn(
          [&](double step) {
            MatrixXd sp = s, sm = s;
            sp(p, q) += step;
            sm(p, q) -= step;
            if (p != q) {
              sp(q, p) += step;
              sm(q, p) -= step;
            }
            return VectorXd((f(sp) - f(sm)) / (2.0 * step));
          },
          h0);
      if (p != q) col *= 0.5;
      jac.col(Flat(p, q, k)) = col;
    }
  }
  return jac;
}

double MaxRelErr(const MatrixXd& analytic, const MatrixXd& oracle,
                 double floor) {
  double worst = 0.0;
  for (int i = 0; i < analytic.rows(); ++i) {
    for (int j = 0; j < analytic.cols(); ++j) {
      const double a = analytic(i, j), b = oracle(i, j);
      const double mag = std::max(std::abs(a), std::abs(b));
      if (mag <= floor) {
        if (std::abs(a - b) > floor) worst = std::max(worst, 1.0);
        continue;
      }
      worst = std::max(worst, std::abs(a - b) / mag);
    }
  }
  return worst;
}

double ScaledRelErr(const MatrixXd& analytic, const MatrixXd& oracle,
                    double floor) {
  return ((analytic - oracle).array().abs() / oracle.array().abs().max(floor))
      .maxCoeff();
}

RolloutSetup RandomSystem::Setup(InferenceMethod method) const {
  RolloutSetup s;
  s.features = features;
  s.cost_map = cost_map;
  s.cost = cost;
  s.method = method;
  return s;
}

RandomSystem MakeRandomSystem(Rng* rng) {
  RandomSystem sys;
  sys.features = TrigFeatures(3, {1});
  const int fd = sys.features.feature_dim();
  sys.u_max = VectorXd::Constant(1, Uniform(rng, 1.0, 3.0));

  const int n = 30, q = fd + 1, e = 3;
  MatrixXd x(n, q), y(n, e);
  const MatrixXd mix = 0.2 * Normal(rng, e * q).reshaped(e, q);
  for (int i = 0; i < n; ++i) {
    const VectorXd s = RandomVector(rng, 3, -2.0, 2.0);
    x.row(i) << sys.features.Apply(s).transpose(),
        Uniform(rng, -1.0, 1.0) * sys.u_max(0);
    y.row(i) = (mix * x.row(i).transpose()).array().sin().matrix().transpose();
  }
  std::vector<GpHyperparams> hps;
  for (int a = 0; a < e; ++a) {
    GpHyperparams hp;
    hp.length_scales = RandomVector(rng, q, 0.8, 3.0);
    hp.signal_var = Uniform(rng, 0.02, 0.1);
    hp.noise_var = Uniform(rng, 1e-3, 5e-3);
    hps.push_back(hp);
  }
  sys.model = GpModel::Build(x, y, hps);

  sys.cost_map.trig = sys.features;
  sys.cost_map.lin = Normal(rng, 2 * fd).reshaped(2, fd);
  sys.cost_map.offset = RandomVector(rng, 2, -0.5, 0.5);
  sys.cost = CostConfig::Selector(RandomVector(rng, 2, -1.0, 1.0),
                                  VectorXd::Ones(2), Uniform(rng, 0.5, 1.5));
  sys.initial = GaussianBelief(RandomVector(rng, 3, -0.5, 0.5),
                               RandomCov(rng, 3, 0.005, 0.05));
  return sys;
}

Policy RandomRbfPolicy(const RandomSystem& sys, int basis, Rng* rng) {
  Policy p = Policy::Rbf(sys.features.feature_dim(), 1, basis, sys.u_max);
  const GaussianSampler init(sys.initial.mean(), 4.0 * sys.initial.cov());
  VectorXd theta(p.num_params());
  int k = 0;
  for (int i = 0; i < basis; ++i) {
    const VectorXd c = sys.features.Apply(init.Draw(rng));
    for (int d = 0; d < c.size(); ++d) theta(k++) = c(d);
  }
  for (int d = 0; d < sys.features.feature_dim(); ++d)
    theta(k++) = Uniform(rng, -0.5, 0.5);
  for (int i = 0; i < basis; ++i)
    theta(k++) = Uniform(rng, -1.0, 1.0) * sys.u_max(0);
  p.SetParams(theta);
  return p;
}

Policy RandomLinearPolicy(const RandomSystem& sys, Rng* rng) {
  Policy p = Policy::Linear(sys.features.feature_dim(), 1, sys.u_max);
  p.SetParams(0.5 * Normal(rng, p.num_params()));
  return p;
}

MatrixXd FdRolloutGradient(const RolloutEngine& engine, const Policy& policy,
                           const GaussianBelief& initial, int horizon,
                           double h0) {
  return FdJacobian(
      [&](const VectorXd& th) {
        Policy q = policy;
        q.SetParams(th);
        return VectorXd::Constant(
            1, engine.Rollout(q, initial, horizon, false).total_cost);
      },
      policy.params(), h0);
}

}  // namespace pilco::verify
