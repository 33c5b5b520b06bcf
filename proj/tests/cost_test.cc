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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pilco/environment.h"
#include "test_util.h"

namespace pilco {
namespace {

using testing::Rng;

CostConfig TwoDim(double sigma_c = 0.25) {
  VectorXd target(2);
  target << 0.1, 0.5;
  return CostConfig::Selector(target, VectorXd::Ones(2), sigma_c);
}

VectorXd Flatten(const MatrixXd& m) {
  return Eigen::Map<const VectorXd>(m.data(), m.size());
}

TEST(CostTest, PointCostSaturates) {
  const CostConfig cfg = TwoDim();
  EXPECT_DOUBLE_EQ(Cost(cfg, cfg.target), 0.0);
  VectorXd far = cfg.target;
  far(0) += 100.0;
  EXPECT_DOUBLE_EQ(Cost(cfg, far), 1.0);
  VectorXd one = cfg.target;
  one(1) += 0.25;
  EXPECT_NEAR(Cost(cfg, one), 1.0 - std::exp(-0.5), 1e-15);
}

TEST(CostTest, SelectorValidation) {
  EXPECT_THROW(CostConfig::Selector(VectorXd::Zero(2), VectorXd::Ones(2), 0.0),
               DomainError);
  EXPECT_THROW(CostConfig::Selector(VectorXd::Zero(2), VectorXd::Ones(3), 1.0),
               DomainError);
}

TEST(ExpectedCostTest, ZeroCovarianceAtTarget) {
  const CostConfig cfg = TwoDim();
  const CostMoment c = ExpectedCost(cfg, cfg.target, MatrixXd::Zero(2, 2));
  EXPECT_DOUBLE_EQ(c.value, 0.0);
  EXPECT_EQ(c.d_mean.norm(), 0.0);
}

TEST(ExpectedCostTest, ZeroCovarianceIsPointCost) {
  Rng rng(3);
  const CostConfig cfg = TwoDim();
  for (int i = 0; i < 20; ++i) {
    const VectorXd m = testing::RandomVector(&rng, 2, -1.0, 1.0);
    EXPECT_NEAR(ExpectedCost(cfg, m, MatrixXd::Zero(2, 2)).value, Cost(cfg, m),
                1e-14);
  }
}

TEST(ExpectedCostTest, MatchesMonteCarlo) {
  Rng rng(11);
  const CostConfig cfg = TwoDim(0.25);
  const VectorXd m = testing::RandomVector(&rng, 2, -0.2, 0.6);
  const MatrixXd s = testing::RandomCov(&rng, 2, 0.01, 0.08);
  const long n = 10000000;
  testing::GaussianSampler sampler(m, s);
  testing::MomentSe acc(1, n);
  VectorXd c(1);
  for (long i = 0; i < n; ++i) {
    c(0) = Cost(cfg, sampler.Draw(&rng));
    acc.Add(c);
  }
  const auto r = acc.Compute();
  EXPECT_LE(std::abs(ExpectedCost(cfg, m, s).value - r.mean(0)),
            3 * r.mean_se(0));
  const double sd = CostStd(cfg, m, s).value;
  EXPECT_LE(std::abs(sd * sd - r.cov(0, 0)), 3 * r.cov_se(0, 0));
}

TEST(ExpectedCostTest, StaysInUnitInterval) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const CostConfig cfg = TwoDim(testing::Uniform(&rng, 0.05, 2.0));
    const VectorXd m = testing::RandomVector(&rng, 2, -5.0, 5.0);
    const MatrixXd s = testing::RandomCov(&rng, 2, 0.0, 10.0);
    const double v = ExpectedCost(cfg, m, s).value;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(ExpectedCostTest, GradientsMatchFiniteDifferences) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const CostConfig cfg = TwoDim(testing::Uniform(&rng, 0.2, 1.0));
    const VectorXd m = testing::RandomVector(&rng, 2, -1.0, 1.0);
    const MatrixXd s = testing::RandomCov(&rng, 2, 0.02, 0.5);
    for (bool std_dev : {false, true}) {
      auto eval = [&](const VectorXd& mm, const MatrixXd& ss) {
        return std_dev ? CostStd(cfg, mm, ss) : ExpectedCost(cfg, mm, ss);
      };
      const CostMoment c = eval(m, s);
      const MatrixXd fd_m = testing::FdJacobian(
          [&](const VectorXd& x) {
            return VectorXd::Constant(1, eval(x, s).value);
          },
          m);
      const MatrixXd fd_s = testing::FdCovJacobian(
          [&](const MatrixXd& ss) {
            return VectorXd::Constant(1, eval(m, ss).value);
          },
          s);
      EXPECT_LE(testing::MaxRelErr(c.d_mean.transpose(), fd_m), 1e-5)
          << "trial " << trial << " std " << std_dev;
      EXPECT_LE(testing::MaxRelErr(Flatten(c.d_cov).transpose(), fd_s), 1e-5)
          << "trial " << trial << " std " << std_dev;
    }
  }
}

TEST(ExpectedCostTest, SingularSystemIsNumericalError) {
  CostConfig cfg;
  cfg.target = VectorXd::Zero(1);
  cfg.precision = -MatrixXd::Identity(1, 1);
  EXPECT_THROW(ExpectedCost(cfg, VectorXd::Zero(1), MatrixXd::Identity(1, 1)),
               NumericalError);
}

TEST(ExpectedCostTest, DimensionMismatch) {
  EXPECT_THROW(ExpectedCost(TwoDim(), VectorXd::Zero(3), MatrixXd::Zero(3, 3)),
               DomainError);
}

// Far from the target the expected cost falls as the variance grows, as long
// as the variance stays below |mu - target|^2 - sigma_c^2 (the stationary
// point of the 1-D closed form).
TEST(CostOrderingTest, ExplorationFarFromTarget) {
  const double sc = 0.25;
  const CostConfig cfg =
      CostConfig::Selector(VectorXd::Zero(1), VectorXd::Ones(1), sc);
  for (double dist : {3.0 * sc, 4.0 * sc, 6.0 * sc}) {
    const double s_max = dist * dist - sc * sc;
    double prev =
        ExpectedCost(cfg, VectorXd::Constant(1, dist), MatrixXd::Zero(1, 1))
            .value;
    for (int i = 1; i <= 200; ++i) {
      const double s = s_max * i / 200.0;
      const double v = ExpectedCost(cfg, VectorXd::Constant(1, dist),
                                    MatrixXd::Constant(1, 1, s))
                           .value;
      EXPECT_LE(v, prev) << "dist " << dist << " var " << s;
      prev = v;
    }
  }
}

TEST(CostOrderingTest, ExploitationAtTarget) {
  const double sc = 0.25;
  const CostConfig cfg =
      CostConfig::Selector(VectorXd::Zero(1), VectorXd::Ones(1), sc);
  double prev = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double s = 0.05 * i;
    const double v =
        ExpectedCost(cfg, VectorXd::Zero(1), MatrixXd::Constant(1, 1, s)).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(CostOrderingTest, ExploitationLoewnerOrderTwoDim) {
  Rng rng(23);
  const CostConfig cfg = TwoDim();
  for (int i = 0; i < 50; ++i) {
    const MatrixXd s1 = testing::RandomCov(&rng, 2, 0.0, 0.5);
    const MatrixXd s2 = s1 + testing::RandomCov(&rng, 2, 0.0, 0.5);
    EXPECT_LE(ExpectedCost(cfg, cfg.target, s1).value,
              ExpectedCost(cfg, cfg.target, s2).value);
  }
}

TEST(CostStdTest, ZeroCovarianceIsZero) {
  Rng rng(2);
  const CostConfig cfg = TwoDim();
  for (int i = 0; i < 10; ++i) {
    const VectorXd m = testing::RandomVector(&rng, 2, -1.0, 1.0);
    const CostMoment c = CostStd(cfg, m, MatrixXd::Zero(2, 2));
    EXPECT_EQ(c.value, 0.0);
    EXPECT_EQ(c.d_mean.norm(), 0.0);
  }
}

TEST(CostStdTest, SaturatesFarAway) {
  const CostConfig cfg = TwoDim();
  VectorXd m = cfg.target;
  m(0) += 50.0;
  EXPECT_LT(CostStd(cfg, m, 0.01 * MatrixXd::Identity(2, 2)).value, 1e-12);
}

TEST(CostSpaceTest, UprightDoublePendulumIsAtTarget) {
  const EnvSpec spec = EnvSpec::DoublePendulum();
  const VectorXd y = spec.cost_map().Apply(VectorXd::Zero(4));
  EXPECT_NEAR((y - spec.target()).norm(), 0.0, 1e-15);
}

TEST(CostSpaceTest, HangingCartPoleDistance) {
  const EnvSpec spec = EnvSpec::CartPole();
  const VectorXd y = spec.cost_map().Apply(VectorXd::Zero(4));
  EXPECT_NEAR((y - spec.target()).norm(), 1.0, 1e-15);
  const GaussianBelief b = MapToCostSpace(
      spec.cost_map(), GaussianBelief(VectorXd::Zero(4), MatrixXd::Zero(4, 4)));
  EXPECT_NEAR((b.mean() - spec.target()).norm(), 1.0, 1e-15);
  EXPECT_NEAR(b.cov().norm(), 0.0, 1e-15);
}

TEST(CostSpaceTest, MatchesMonteCarlo) {
  Rng rng(29);
  for (const EnvSpec& spec : {EnvSpec::CartPole(), EnvSpec::DoublePendulum()}) {
    const VectorXd m = testing::RandomVector(&rng, 4, -1.5, 1.5);
    const MatrixXd s = testing::RandomCov(&rng, 4, 0.02, 0.6);
    const CostSpaceMap map = spec.cost_map();
    const GaussianBelief b = MapToCostSpace(map, GaussianBelief(m, s));
    const long n = 1000000;
    testing::GaussianSampler sampler(m, s);
    testing::MomentSe acc(2, n);
    for (long i = 0; i < n; ++i) acc.Add(map.Apply(sampler.Draw(&rng)));
    const auto r = acc.Compute();
    for (int a = 0; a < 2; ++a) {
      EXPECT_LE(std::abs(b.mean()(a) - r.mean(a)), 3 * r.mean_se(a));
      for (int c = 0; c < 2; ++c)
        EXPECT_LE(std::abs(b.cov()(a, c) - r.cov(a, c)), 3 * r.cov_se(a, c));
    }
  }
}

}  // namespace
}  // namespace pilco
