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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pilco/environment.h"
#include "test_util.h"

namespace pilco {
namespace {

using testing::Rng;

// Dynamics model learned from two random cart-pole episodes, on inputs
// [features(x), u] (or [x, u]).
GpModel CartPoleModel(const EnvSpec& spec, bool features) {
  const TrigFeatures feat = spec.features();
  const int q =
      (features ? feat.feature_dim() : spec.state_dim()) + spec.control_dim();
  MatrixXd x(50, q), y(50, spec.state_dim());
  int row = 0;
  for (std::uint64_t seed : {11u, 12u}) {
    const Episode ep = RunEpisode(spec, nullptr, seed);
    for (int t = 0; t < ep.steps(); ++t, ++row) {
      const VectorXd s = ep.states.row(t).transpose();
      x.row(row) << (features ? feat.Apply(s) : s).transpose(),
          ep.controls.row(t);
      y.row(row) = ep.states.row(t + 1) - ep.states.row(t);
    }
  }
  FitOptions fo;
  fo.restarts = 1;
  return Fit(x, y, {}, fo);
}

RolloutSetup CartPoleSetup(const EnvSpec& spec, InferenceMethod method,
                           bool features = true) {
  RolloutSetup s;
  s.features = spec.features();
  s.model_uses_features = features;
  s.cost_map = spec.cost_map();
  s.cost = spec.cost_config();
  s.method = method;
  return s;
}

Policy RandomRbf(const EnvSpec& spec, int n, Rng* rng) {
  Policy p = Policy::Rbf(spec.features().feature_dim(), 1, n, spec.u_max);
  const TrigFeatures feat = spec.features();
  testing::GaussianSampler init(spec.init_mean, 4.0 * spec.init_cov);
  VectorXd theta(p.num_params());
  int k = 0;
  for (int i = 0; i < n; ++i) {
    const VectorXd c = feat.Apply(init.Draw(rng));
    for (int d = 0; d < c.size(); ++d) theta(k++) = c(d);
  }
  for (int d = 0; d < feat.feature_dim(); ++d)
    theta(k++) = testing::Uniform(rng, -0.5, 0.5);
  for (int i = 0; i < n; ++i)
    theta(k++) = testing::Uniform(rng, -1.0, 1.0) * spec.u_max(0);
  p.SetParams(theta);
  return p;
}

Policy RandomLinear(const EnvSpec& spec, Rng* rng) {
  Policy p = Policy::Linear(spec.features().feature_dim(), 1, spec.u_max);
  p.SetParams(testing::Normal(rng, p.num_params()));
  return p;
}

GaussianBelief InitialBelief(const EnvSpec& spec) {
  return GaussianBelief(spec.init_mean, spec.init_cov);
}

class RolloutTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    spec_ = new EnvSpec(EnvSpec::CartPole());
    model_ = new GpModel(CartPoleModel(*spec_, true));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete spec_;
  }
  static EnvSpec* spec_;
  static GpModel* model_;
};

EnvSpec* RolloutTest::spec_ = nullptr;
GpModel* RolloutTest::model_ = nullptr;

// Fitted models have kernel matrices with condition numbers near 1e7, which
// puts round-off of order 1e-10 on J. Components far below the gradient
// scale are then compared against 1e-3 of the largest component.
double FittedRelErr(const VectorXd& grad, const MatrixXd& fd) {
  return testing::ScaledRelErr(grad.transpose(), fd,
                               1e-3 * fd.cwiseAbs().maxCoeff());
}

TEST_F(RolloutTest, PolicyGradientMatchesFiniteDifferences) {
  Rng rng(101);
  for (InferenceMethod method :
       {InferenceMethod::kMomentMatch, InferenceMethod::kLinearize}) {
    const RolloutEngine engine(*model_, CartPoleSetup(*spec_, method));
    std::vector<Policy> policies;
    for (int i = 0; i < 3; ++i) policies.push_back(RandomRbf(*spec_, 4, &rng));
    for (int i = 0; i < 2; ++i) policies.push_back(RandomLinear(*spec_, &rng));
    for (size_t i = 0; i < policies.size(); ++i) {
      const Policy& p = policies[i];
      ASSERT_LE(p.num_params(), 30);
      const RolloutReport r =
          engine.Rollout(p, InitialBelief(*spec_), 10, true);
      ASSERT_EQ(r.grad.size(), p.num_params());
      const MatrixXd fd = testing::FdRolloutGradient(
          engine, p, InitialBelief(*spec_), 10, 5e-2);
      const double err = FittedRelErr(r.grad, fd);
      EXPECT_LE(err, 1e-4) << MethodName(method) << " policy " << i;
      EXPECT_GT(r.grad.norm(), 1e-6);
    }
  }
}

TEST_F(RolloutTest, DeterministicMeanGradientMatchesFiniteDifferences) {
  Rng rng(7);
  RolloutSetup setup = CartPoleSetup(*spec_, InferenceMethod::kMomentMatch);
  setup.options.include_model_variance = false;
  const RolloutEngine engine(*model_, setup);
  const Policy p = RandomRbf(*spec_, 4, &rng);
  const RolloutReport r = engine.Rollout(p, InitialBelief(*spec_), 8, true);
  const MatrixXd fd =
      testing::FdRolloutGradient(engine, p, InitialBelief(*spec_), 8, 5e-2);
  EXPECT_LE(FittedRelErr(r.grad, fd), 1e-4);
}

TEST_F(RolloutTest, RawStateModelGradientMatchesFiniteDifferences) {
  Rng rng(9);
  const GpModel raw = CartPoleModel(*spec_, false);
  const RolloutEngine engine(
      raw, CartPoleSetup(*spec_, InferenceMethod::kMomentMatch, false));
  const Policy p = RandomRbf(*spec_, 4, &rng);
  const RolloutReport r = engine.Rollout(p, InitialBelief(*spec_), 8, true);
  const MatrixXd fd =
      testing::FdRolloutGradient(engine, p, InitialBelief(*spec_), 8, 5e-2);
  EXPECT_LE(FittedRelErr(r.grad, fd), 1e-4);
}

// Well-conditioned random systems: every gradient entry is resolvable by
// finite differences at the tight tolerance.
TEST(RandomSystemTest, RolloutGradientMatchesFiniteDifferences) {
  Rng rng(211);
  for (int trial = 0; trial < 6; ++trial) {
    const testing::RandomSystem sys = testing::MakeRandomSystem(&rng);
    for (InferenceMethod method :
         {InferenceMethod::kMomentMatch, InferenceMethod::kLinearize}) {
      const RolloutEngine engine(sys.model, sys.Setup(method));
      for (const Policy& p : {testing::RandomRbfPolicy(sys, 3, &rng),
                              testing::RandomLinearPolicy(sys, &rng)}) {
        ASSERT_LE(p.num_params(), 30);
        const RolloutReport r = engine.Rollout(p, sys.initial, 10, true);
        const MatrixXd fd =
            testing::FdRolloutGradient(engine, p, sys.initial, 10);
        EXPECT_LE(testing::MaxRelErr(r.grad.transpose(), fd), 1e-4)
            << "trial " << trial << " " << MethodName(method) << " "
            << VariantName(p.variant());
      }
    }
  }
}

TEST(RandomSystemTest, VariantsMatchFiniteDifferences) {
  Rng rng(223);
  for (int trial = 0; trial < 3; ++trial) {
    const testing::RandomSystem sys = testing::MakeRandomSystem(&rng);
    RolloutSetup ucb = sys.Setup(InferenceMethod::kMomentMatch);
    ucb.cost.ucb_kappa = 0.5;
    RolloutSetup det = sys.Setup(InferenceMethod::kMomentMatch);
    det.options.include_model_variance = false;
    for (const RolloutSetup& setup : {ucb, det}) {
      const RolloutEngine engine(sys.model, setup);
      const Policy p = testing::RandomRbfPolicy(sys, 3, &rng);
      const RolloutReport r = engine.Rollout(p, sys.initial, 10, true);
      const MatrixXd fd =
          testing::FdRolloutGradient(engine, p, sys.initial, 10);
      EXPECT_LE(testing::MaxRelErr(r.grad.transpose(), fd), 1e-4)
          << "trial " << trial << " kappa " << setup.cost.ucb_kappa;
    }
  }
}

TEST(RandomSystemTest, StepJacobiansMatchFiniteDifferences) {
  Rng rng(13);
  for (int trial = 0; trial < 4; ++trial) {
    const testing::RandomSystem sys = testing::MakeRandomSystem(&rng);
    for (InferenceMethod method :
         {InferenceMethod::kMomentMatch, InferenceMethod::kLinearize}) {
      const RolloutEngine engine(sys.model, sys.Setup(method));
      const Policy p = testing::RandomRbfPolicy(sys, 3, &rng);
      const VectorXd m = sys.initial.mean();
      const MatrixXd s = sys.initial.cov();
      const StepResult st = engine.Step(p, sys.initial);
      const int d = 3, np = p.num_params();
      ASSERT_EQ(st.d_mean.cols(), d + d * d + np);
      auto pack = [](const GaussianBelief& b) {
        VectorXd v(3 + 9);
        v << b.mean(), Eigen::Map<const VectorXd>(b.cov().data(), 9);
        return v;
      };
      MatrixXd analytic(12, d + d * d + np);
      analytic << st.d_mean, st.d_cov;
      const MatrixXd fd_m = testing::FdJacobian(
          [&](const VectorXd& mm) {
            return pack(engine.Step(p, GaussianBelief(mm, s)).next);
          },
          m);
      const MatrixXd fd_s = testing::FdCovJacobian(
          [&](const MatrixXd& ss) {
            return pack(engine.Step(p, GaussianBelief(m, ss)).next);
          },
          s);
      const MatrixXd fd_p = testing::FdJacobian(
          [&](const VectorXd& th) {
            Policy q = p;
            q.SetParams(th);
            return pack(engine.Step(q, GaussianBelief(m, s)).next);
          },
          p.params());
      EXPECT_LE(testing::MaxRelErr(analytic.leftCols(d), fd_m), 1e-5)
          << MethodName(method);
      EXPECT_LE(testing::MaxRelErr(analytic.middleCols(d, d * d), fd_s), 1e-5)
          << MethodName(method);
      EXPECT_LE(testing::MaxRelErr(analytic.rightCols(np), fd_p), 1e-5)
          << MethodName(method);
    }
  }
}

TEST_F(RolloutTest, BeliefChainEqualsFoldedSteps) {
  Rng rng(17);
  const RolloutEngine engine(
      *model_, CartPoleSetup(*spec_, InferenceMethod::kMomentMatch));
  const Policy p = RandomRbf(*spec_, 4, &rng);
  for (bool grad : {false, true}) {
    const RolloutReport r = engine.Rollout(p, InitialBelief(*spec_), 10, grad);
    ASSERT_EQ(r.beliefs.size(), 11u);
    GaussianBelief b = InitialBelief(*spec_);
    for (int t = 1; t <= 10; ++t) {
      b = engine.Step(p, b).next;
      EXPECT_EQ(b.mean(), r.beliefs[t].mean()) << "t " << t;
      EXPECT_EQ(b.cov(), r.beliefs[t].cov()) << "t " << t;
    }
  }
}

TEST_F(RolloutTest, SingleStepHorizonReducesToStep) {
  Rng rng(19);
  const RolloutEngine engine(
      *model_, CartPoleSetup(*spec_, InferenceMethod::kLinearize));
  const Policy p = RandomLinear(*spec_, &rng);
  const RolloutReport r = engine.Rollout(p, InitialBelief(*spec_), 1, true);
  const StepResult st = engine.Step(p, InitialBelief(*spec_));
  EXPECT_EQ(r.beliefs[1].mean(), st.next.mean());
  EXPECT_EQ(r.beliefs[1].cov(), st.next.cov());
  ASSERT_EQ(r.step_costs.size(), 2u);
  const GaussianBelief c1 = MapToCostSpace(spec_->cost_map(), st.next);
  EXPECT_NEAR(r.step_costs[1], ExpectedCost(spec_->cost_config(), c1).value,
              1e-12);
}

TEST_F(RolloutTest, CostsSaturateAndSum) {
  Rng rng(23);
  const RolloutEngine engine(
      *model_, CartPoleSetup(*spec_, InferenceMethod::kMomentMatch));
  for (int i = 0; i < 5; ++i) {
    const Policy p = RandomRbf(*spec_, 4, &rng);
    const RolloutReport r = engine.Rollout(p, InitialBelief(*spec_), 25, false);
    double sum = 0.0;
    for (double c : r.step_costs) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
      sum += c;
    }
    EXPECT_NEAR(r.total_cost, sum, 1e-12);
    EXPECT_LE(r.total_cost, 26.0);
    EXPECT_TRUE(r.grad.size() == 0);
    for (const GaussianBelief& b : r.beliefs) {
      EXPECT_EQ(b.cov(), b.cov().transpose());
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(b.cov())
                    .eigenvalues()
                    .minCoeff(),
                -1e-10);
    }
  }
}

TEST_F(RolloutTest, ZeroVarianceZeroPolicyIsPointPrediction) {
  for (InferenceMethod method :
       {InferenceMethod::kMomentMatch, InferenceMethod::kLinearize}) {
    const RolloutEngine engine(*model_, CartPoleSetup(*spec_, method));
    Policy p = Policy::Linear(5, 1, spec_->u_max);
    p.SetParams(VectorXd::Zero(p.num_params()));
    VectorXd m(4);
    m << 0.05, -0.1, 0.02, 0.1;
    const StepResult st =
        engine.Step(p, GaussianBelief(m, MatrixXd::Zero(4, 4)));
    VectorXd in(6);
    in << spec_->features().Apply(m), 0.0;
    const PointPrediction pp = PredictPoint(*model_, in);
    EXPECT_LE((st.next.mean() - (m + pp.mean)).cwiseAbs().maxCoeff(), 1e-10)
        << MethodName(method);
    EXPECT_LE((st.next.cov().diagonal() - pp.var).cwiseAbs().maxCoeff(), 1e-10)
        << MethodName(method);
  }
}

TEST_F(RolloutTest, OneStepMatchesMonteCarlo) {
  // A constant control and a raw-state model make the model input exactly
  // Gaussian, so moment matching gives the exact successor moments.
  const GpModel raw = CartPoleModel(*spec_, false);
  const RolloutEngine engine(
      raw, CartPoleSetup(*spec_, InferenceMethod::kMomentMatch, false));
  Policy p = Policy::Linear(5, 1, spec_->u_max);
  VectorXd theta = VectorXd::Zero(p.num_params());
  theta(5) = 0.4;
  p.SetParams(theta);
  Rng rng(29);
  const VectorXd m = spec_->init_mean + 0.2 * testing::Normal(&rng, 4);
  const MatrixXd s = testing::RandomCov(&rng, 4, 0.01, 0.1);
  const StepResult st = engine.Step(p, GaussianBelief(m, s));
  const double u = p.Control(spec_->features().Apply(m))(0);

  const long n = 400000;
  testing::GaussianSampler sampler(m, s);
  std::normal_distribution<double> nd;
  testing::MomentSe acc(4, n);
  VectorXd in(5);
  for (long i = 0; i < n; ++i) {
    const VectorXd x = sampler.Draw(&rng);
    in << x, u;
    const PointPrediction pp = PredictPoint(raw, in);
    VectorXd next = x + pp.mean;
    for (int a = 0; a < 4; ++a) next(a) += std::sqrt(pp.var(a)) * nd(rng);
    acc.Add(next);
  }
  const auto r = acc.Compute();
  for (int a = 0; a < 4; ++a) {
    EXPECT_LE(std::abs(st.next.mean()(a) - r.mean(a)), 4 * r.mean_se(a));
    for (int b = 0; b < 4; ++b)
      EXPECT_LE(std::abs(st.next.cov()(a, b) - r.cov(a, b)), 4 * r.cov_se(a, b))
          << a << "," << b;
  }
}

TEST_F(RolloutTest, Deterministic) {
  Rng rng(31);
  const RolloutEngine engine(
      *model_, CartPoleSetup(*spec_, InferenceMethod::kMomentMatch));
  const Policy p = RandomRbf(*spec_, 4, &rng);
  const RolloutReport a = engine.Rollout(p, InitialBelief(*spec_), 10, true);
  const RolloutReport b = engine.Rollout(p, InitialBelief(*spec_), 10, true);
  EXPECT_EQ(a.total_cost, b.total_cost);
  EXPECT_EQ(a.grad, b.grad);
}

TEST_F(RolloutTest, DivergenceReportsStep) {
  // A point-mass start makes model noise an unbounded relative blow-up.
  const RolloutEngine engine(
      *model_, CartPoleSetup(*spec_, InferenceMethod::kMomentMatch));
  Policy p = Policy::Linear(5, 1, spec_->u_max);
  p.SetParams(VectorXd::Zero(p.num_params()));
  const GaussianBelief point(spec_->init_mean, MatrixXd::Zero(4, 4));
  int step = 0;
  try {
    engine.Rollout(p, point, 10, false);
    FAIL() << "expected RolloutDiverged";
  } catch (const RolloutDiverged& e) {
    step = e.step();
  }
  ASSERT_GE(step, 1);
  // The trace limit is 1e6 * 1e-8 for a zero initial trace.
  if (step > 1) {
    const RolloutReport r = engine.Rollout(p, point, step - 1, false);
    EXPECT_LE(r.beliefs.back().cov().trace(), 1e-2);
  }
}

TEST_F(RolloutTest, RejectsBadHorizonAndDimensions) {
  const RolloutEngine engine(
      *model_, CartPoleSetup(*spec_, InferenceMethod::kMomentMatch));
  Policy p = Policy::Linear(5, 1, spec_->u_max);
  EXPECT_THROW(engine.Rollout(p, InitialBelief(*spec_), 0, false), DomainError);
  Policy wrong = Policy::Linear(4, 1, spec_->u_max);
  EXPECT_THROW(engine.Rollout(wrong, InitialBelief(*spec_), 3, false),
               DomainError);
}

}  // namespace
}  // namespace pilco
