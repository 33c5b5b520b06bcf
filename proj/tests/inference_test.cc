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

#include "pilco/inference.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"

namespace pilco {
namespace {

using testing::FdCovJacobian;
using testing::FdJacobian;
using testing::MaxRelErr;
using testing::Rng;

VectorXd Flatten(const UncertainPrediction& p) {
  VectorXd v(p.delta_mean.size() + p.delta_cov.size() +
             p.input_delta_cross_cov.size());
  v << p.delta_mean, Vec(p.delta_cov), Vec(p.input_delta_cross_cov);
  return v;
}

using PredictFn = UncertainPrediction (*)(const GpModel&, const GaussianBelief&,
                                          const InferenceOptions&);
using GradFn = InferenceGradients (*)(const GpModel&, const GaussianBelief&,
                                      const InferenceOptions&);

// Worst relative error of the six gradient blocks against central
// differences of the forward prediction.
double GradientError(const GpModel& model, const VectorXd& m, const MatrixXd& s,
                     PredictFn predict, GradFn grad,
                     const InferenceOptions& opt = {}) {
  const InferenceGradients g = grad(model, GaussianBelief(m, s), opt);
  const MatrixXd fd_m = FdJacobian(
      [&](const VectorXd& x) {
        return Flatten(predict(model, GaussianBelief(x, s), opt));
      },
      m);
  const MatrixXd fd_s = FdCovJacobian(
      [&](const MatrixXd& c) {
        return Flatten(predict(model, GaussianBelief(m, c), opt));
      },
      s);
  MatrixXd an_m(fd_m.rows(), fd_m.cols()), an_s(fd_s.rows(), fd_s.cols());
  an_m << g.d_mean_d_input_mean, g.d_cov_d_input_mean,
      g.d_crosscov_d_input_mean;
  an_s << g.d_mean_d_input_cov, g.d_cov_d_input_cov, g.d_crosscov_d_input_cov;
  return std::max(MaxRelErr(an_m, fd_m), MaxRelErr(an_s, fd_s));
}

TEST(MomentMatchTest, ZeroCovarianceReducesToPointPrediction) {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int q = 1 + trial % 3, e = 1 + trial % 2;
    const GpModel model = testing::RandomModel(&rng, q, e, 30);
    const VectorXd m = testing::RandomVector(&rng, q, -2, 2);
    const GaussianBelief in = GaussianBelief::Point(m);
    const PointPrediction pp = PredictPoint(model, m);
    for (PredictFn fn : {&MomentMatch, &LinearizePredict}) {
      const UncertainPrediction p = fn(model, in, {});
      EXPECT_LE((p.delta_mean - pp.mean).cwiseAbs().maxCoeff(), 1e-10);
      for (int a = 0; a < e; ++a) {
        EXPECT_NEAR(p.delta_cov(a, a), pp.var(a), 1e-10);
        for (int b = 0; b < e; ++b) {
          if (a == b) continue;
          EXPECT_NEAR(p.delta_cov(a, b), 0.0, 1e-12);
        }
      }
      EXPECT_LE(p.input_delta_cross_cov.cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(MomentMatchTest, DeterministicMeanDropsLatentVariance) {
  Rng rng(42);
  const GpModel model = testing::RandomModel(&rng, 2, 2, 25);
  const VectorXd m = testing::RandomVector(&rng, 2, -1, 1);
  InferenceOptions opt;
  opt.include_model_variance = false;
  const UncertainPrediction p =
      MomentMatch(model, GaussianBelief::Point(m), opt);
  for (int a = 0; a < 2; ++a)
    EXPECT_NEAR(p.delta_cov(a, a), model.output(a).hp.noise_var, 1e-10);
}

TEST(MomentMatchTest, MatchesMonteCarlo) {
  Rng rng(43);
  for (int trial = 0; trial < 6; ++trial) {
    const int q = 1 + trial % 3, e = 1 + (trial / 3) % 2;
    const GpModel model = testing::RandomModel(&rng, q, e, 20 + 5 * trial);
    const VectorXd m = testing::RandomVector(&rng, q, -1.5, 1.5);
    const MatrixXd s = testing::RandomCov(&rng, q, 0.05, 1.0);
    for (bool with_var : {true, false}) {
      InferenceOptions opt;
      opt.include_model_variance = with_var;
      const UncertainPrediction p =
          MomentMatch(model, GaussianBelief(m, s), opt);
      const auto r = testing::McPredict(model, m, s, 1000000, with_var, &rng);
      for (int a = 0; a < e; ++a) {
        EXPECT_LE(std::abs(p.delta_mean(a) - r.mean(q + a)),
                  4 * r.mean_se(q + a));
        for (int b = 0; b < e; ++b)
          EXPECT_LE(std::abs(p.delta_cov(a, b) - r.cov(q + a, q + b)),
                    4 * r.cov_se(q + a, q + b));
        for (int i = 0; i < q; ++i)
          EXPECT_LE(std::abs(p.input_delta_cross_cov(i, a) - r.cov(i, q + a)),
                    4 * r.cov_se(i, q + a));
      }
    }
  }
}

TEST(MomentMatchTest, OutputCovariancePsd) {
  Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const int q = 1 + trial % 4, e = 1 + trial % 3;
    const GpModel model = testing::RandomModel(&rng, q, e, 20);
    const GaussianBelief in(testing::RandomVector(&rng, q, -2, 2),
                            testing::RandomCov(&rng, q, 1e-3, 2.0));
    for (PredictFn fn : {&MomentMatch, &LinearizePredict}) {
      const UncertainPrediction p = fn(model, in, {});
      EXPECT_NO_THROW(CheckCovariance(p.delta_cov, "delta_cov"));
      EXPECT_EQ(p.input_delta_cross_cov.rows(), q);
      EXPECT_EQ(p.input_delta_cross_cov.cols(), e);
    }
  }
}

TEST(MomentMatchTest, UncertainVarianceDominatesPointVariance) {
  Rng rng(45);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int q = 1 + trial % 3;
    const GpModel model = testing::RandomModel(&rng, q, 1, 30);
    const VectorXd m = testing::RandomVector(&rng, q, -1.5, 1.5);
    const MatrixXd s = testing::RandomCov(&rng, q, 0.01, 0.5);
    const UncertainPrediction p = MomentMatch(model, GaussianBelief(m, s));
    EXPECT_GE(p.delta_cov(0, 0), PredictPoint(model, m).var(0) - 1e-9);
    ++checked;
  }
  EXPECT_EQ(checked, 30);
}

TEST(MomentMatchTest, RejectsDimensionMismatch) {
  Rng rng(46);
  const GpModel model = testing::RandomModel(&rng, 2, 1, 10);
  EXPECT_THROW(MomentMatch(model, GaussianBelief::Point(VectorXd::Zero(3))),
               DomainError);
}

TEST(LinearizeTest, JacobianMatchesPosteriorMeanDifferences) {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const int q = 1 + trial % 3, e = 1 + trial % 2;
    const GpModel model = testing::RandomModel(&rng, q, e, 25);
    const VectorXd m = testing::RandomVector(&rng, q, -1.5, 1.5);
    const InferenceGradients g =
        LinearizeGradients(model, GaussianBelief::Point(m));
    const StageMoments st = PredictStage(model, InferenceMethod::kLinearize, {},
                                         m, MatrixXd::Zero(q, q), true);
    const MatrixXd fd = FdJacobian(
        [&](const VectorXd& x) { return PredictPoint(model, x).mean; }, m);
    EXPECT_LE(MaxRelErr(g.d_mean_d_input_mean, fd), 1e-6);
    EXPECT_LE(MaxRelErr(st.dmean_dm, fd), 1e-6);
  }
}

TEST(LinearizeTest, TighterThanMomentMatchingForWideInputs) {
  // Wide inputs over a bowl-shaped function: the local slope at the mean
  // misses the curvature.
  Rng rng(48);
  int tighter = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 30;
    MatrixXd x(n, 1), y(n, 1);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = testing::Uniform(&rng, -3, 3);
      y(i, 0) = x(i, 0) * x(i, 0);
    }
    GpHyperparams hp;
    hp.length_scales = VectorXd::Constant(1, 0.7);
    hp.signal_var = 2.0;
    hp.noise_var = 0.01;
    const GpModel model = GpModel::Build(x, y, {hp});
    const GaussianBelief in(
        VectorXd::Constant(1, testing::Uniform(&rng, -1, 1)),
        MatrixXd::Constant(1, 1, 1.0));
    if (LinearizePredict(model, in).delta_cov(0, 0) <=
        MomentMatch(model, in).delta_cov(0, 0))
      ++tighter;
  }
  EXPECT_GT(tighter, trials / 2);
}

TEST(LinearizeTest, FirstOrderAgreementWithMomentMatching) {
  Rng rng(49);
  for (int trial = 0; trial < 5; ++trial) {
    const int q = 1 + trial % 3;
    const GpModel model = testing::RandomModel(&rng, q, 1, 25);
    const VectorXd m = testing::RandomVector(&rng, q, -1, 1);
    const MatrixXd s0 = testing::RandomCov(&rng, q, 0.2, 1.0);
    std::vector<double> ratios;
    for (double scale : {1e-2, 1e-4, 1e-6}) {
      const GaussianBelief in(m, scale * s0);
      const double diff = (MomentMatch(model, in).delta_mean -
                           LinearizePredict(model, in).delta_mean)
                              .norm();
      ratios.push_back(diff / (scale * s0.norm()));
    }
    // The O(|S|^2) remainder is still visible at scale 1e-2.
    EXPECT_NEAR(ratios[1] / ratios[0], 1.0, 0.2) << trial;
    EXPECT_NEAR(ratios[2] / ratios[1], 1.0, 1e-2) << trial;
  }
}

TEST(InferenceGradientsTest, MomentMatchMatchesFiniteDifferences) {
  Rng rng(50);
  for (int trial = 0; trial < 20; ++trial) {
    const int q = 1 + trial % 3, e = 1 + trial % 2;
    const GpModel model = testing::RandomModel(&rng, q, e, 10 + trial);
    const VectorXd m = testing::RandomVector(&rng, q, -1.5, 1.5);
    const MatrixXd s = testing::RandomCov(&rng, q, 0.05, 1.0);
    EXPECT_LE(GradientError(model, m, s, &MomentMatch, &MomentMatchGradients),
              1e-5)
        << trial;
  }
}

TEST(InferenceGradientsTest, DeterministicMeanMatchesFiniteDifferences) {
  Rng rng(51);
  InferenceOptions opt;
  opt.include_model_variance = false;
  for (int trial = 0; trial < 5; ++trial) {
    const int q = 2, e = 2;
    const GpModel model = testing::RandomModel(&rng, q, e, 15);
    const VectorXd m = testing::RandomVector(&rng, q, -1.5, 1.5);
    const MatrixXd s = testing::RandomCov(&rng, q, 0.05, 1.0);
    EXPECT_LE(
        GradientError(model, m, s, &MomentMatch, &MomentMatchGradients, opt),
        1e-5);
  }
}

TEST(InferenceGradientsTest, LinearizeMatchesFiniteDifferences) {
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const int q = 1 + trial % 3, e = 1 + trial % 2;
    const GpModel model = testing::RandomModel(&rng, q, e, 15);
    const VectorXd m = testing::RandomVector(&rng, q, -1.5, 1.5);
    const MatrixXd s = testing::RandomCov(&rng, q, 0.05, 1.0);
    EXPECT_LE(
        GradientError(model, m, s, &LinearizePredict, &LinearizeGradients),
        1e-5)
        << trial;
  }
}

TEST(InferenceGradientsTest, CovarianceDerivativesSymmetric) {
  Rng rng(53);
  const int q = 3, e = 2;
  const GpModel model = testing::RandomModel(&rng, q, e, 20);
  const GaussianBelief in(testing::RandomVector(&rng, q, -1, 1),
                          testing::RandomCov(&rng, q, 0.1, 1));
  for (GradFn fn : {&MomentMatchGradients, &LinearizeGradients}) {
    const InferenceGradients g = fn(model, in, {});
    for (const MatrixXd* blk : {&g.d_mean_d_input_cov, &g.d_cov_d_input_cov,
                                &g.d_crosscov_d_input_cov}) {
      for (int p = 0; p < q; ++p)
        for (int r = 0; r < q; ++r)
          EXPECT_EQ(blk->col(Flat(p, r, q)), blk->col(Flat(r, p, q)));
    }
  }
}

TEST(InferenceGradientsTest, ZeroTargetsGiveZeroMeanGradients) {
  Rng rng(54);
  const int q = 2;
  MatrixXd x(12, q);
  for (int i = 0; i < 12; ++i) x.row(i) = testing::RandomVector(&rng, q, -2, 2);
  GpHyperparams hp;
  hp.length_scales = VectorXd::Ones(q);
  hp.signal_var = 1.0;
  hp.noise_var = 0.1;
  const GpModel model = GpModel::Build(x, MatrixXd::Zero(12, 1), {hp});
  const InferenceGradients g = MomentMatchGradients(
      model,
      GaussianBelief(VectorXd::Zero(q), testing::RandomCov(&rng, q, 0.1, 1)));
  EXPECT_EQ(g.d_mean_d_input_mean.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.d_mean_d_input_cov.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InferenceMethodTest, NamesRoundTrip) {
  for (InferenceMethod m :
       {InferenceMethod::kMomentMatch, InferenceMethod::kLinearize})
    EXPECT_EQ(ParseMethod(MethodName(m)), m);
  EXPECT_THROW(ParseMethod("unscented"), DomainError);
}

}  // namespace
}  // namespace pilco
