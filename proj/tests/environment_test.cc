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

#include "pilco/environment.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.h"

namespace pilco {
namespace {

using testing::Rng;
constexpr double kPi = std::numbers::pi;

TEST(EnvSpecTest, DefaultsValidate) {
  EXPECT_NO_THROW(EnvSpec::CartPole().Validate());
  EXPECT_NO_THROW(EnvSpec::DoublePendulum().Validate());
  EXPECT_EQ(EnvSpec::CartPole().horizon_steps(), 25);
  EXPECT_EQ(EnvSpec::DoublePendulum().horizon_steps(), 25);
  EXPECT_EQ(EnvName(ParseEnv("cartpole")), "cartpole");
  EXPECT_EQ(EnvName(ParseEnv("double_pendulum")), "double_pendulum");
  EXPECT_THROW(ParseEnv("unicycle"), DomainError);
}

TEST(EnvSpecTest, RejectsBadParameters) {
  EnvSpec s = EnvSpec::CartPole();
  s.dt_control = 0.0;
  EXPECT_THROW(s.Validate(), DomainError);
  s = EnvSpec::CartPole();
  s.pole_mass = -1.0;
  EXPECT_THROW(s.Validate(), DomainError);
  s = EnvSpec::DoublePendulum();
  s.u_max = VectorXd::Ones(1);
  EXPECT_THROW(s.Validate(), DomainError);
  s = EnvSpec::CartPole();
  s.angle_dims = {7};
  EXPECT_THROW(s.Validate(), DomainError);
}

TEST(DynamicsTest, HangingCartPoleStaysAtRest) {
  const EnvSpec spec = EnvSpec::CartPole();
  VectorXd x = VectorXd::Zero(4);
  for (int t = 0; t < 25; ++t)
    x = SimulateStep(spec, x, VectorXd::Zero(1), nullptr);
  EXPECT_EQ(x.norm(), 0.0);
}

TEST(DynamicsTest, UprightDoublePendulumIsUnstable) {
  const EnvSpec spec = EnvSpec::DoublePendulum();
  VectorXd x = VectorXd::Zero(4);
  x(0) = 1e-6;
  const double e0 = MechanicalEnergy(spec, x);
  for (int t = 0; t < 30; ++t)
    x = SimulateStep(spec, x, VectorXd::Zero(2), nullptr);
  EXPECT_GT(std::abs(x(0)), 1e-2);
  // Energy is conserved, so the motion converts potential into kinetic.
  EXPECT_NEAR(MechanicalEnergy(spec, x), e0, 1e-6 * 30 * std::abs(e0));
  EXPECT_GT(x.tail(2).norm(), 1e-2);
}

TEST(DynamicsTest, EnergyConservedWithoutFriction) {
  Rng rng(4);
  for (EnvSpec spec : {EnvSpec::CartPole(), EnvSpec::DoublePendulum()}) {
    spec.friction = 0.0;
    const VectorXd u = VectorXd::Zero(spec.control_dim());
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd x = testing::RandomVector(&rng, 4, -kPi, kPi);
      x.tail(2) = testing::RandomVector(&rng, 2, -2.0, 2.0);
      if (spec.variant == EnvVariant::kCartPole) {
        x(1) = testing::Uniform(&rng, -2.0, 2.0);
        x(3) = testing::Uniform(&rng, -2.0, 2.0);
      }
      for (int t = 0; t < 10; ++t) {
        const double e0 = MechanicalEnergy(spec, x);
        x = SimulateStep(spec, x, u, nullptr);
        const double e1 = MechanicalEnergy(spec, x);
        EXPECT_LE(std::abs(e1 - e0), 1e-6 * std::max(std::abs(e0), 1.0))
            << EnvName(spec.variant) << " trial " << trial << " step " << t;
      }
    }
  }
}

TEST(DynamicsTest, FrictionDissipatesEnergy) {
  const EnvSpec spec = EnvSpec::CartPole();
  VectorXd x(4);
  x << 0.0, 1.5, 0.5, 0.0;
  double e = MechanicalEnergy(spec, x);
  for (int t = 0; t < 20; ++t) {
    x = SimulateStep(spec, x, VectorXd::Zero(1), nullptr);
    const double e1 = MechanicalEnergy(spec, x);
    EXPECT_LT(e1, e);
    e = e1;
  }
}

TEST(DynamicsTest, IntegratorHalvingSubstepChangesLittle) {
  Rng rng(8);
  for (const EnvSpec& spec : {EnvSpec::CartPole(), EnvSpec::DoublePendulum()}) {
    for (int trial = 0; trial < 50; ++trial) {
      VectorXd x = testing::RandomVector(&rng, 4, -kPi, kPi);
      x.tail(2) = testing::RandomVector(&rng, 2, -2.0, 2.0);
      const VectorXd u =
          testing::RandomVector(&rng, spec.control_dim(), -1.0, 1.0)
              .cwiseProduct(spec.u_max);
      const VectorXd coarse = IntegrateInterval(spec, x, u, spec.substeps);
      const VectorXd fine = IntegrateInterval(spec, x, u, 2 * spec.substeps);
      EXPECT_LE((coarse - fine).cwiseAbs().maxCoeff(), 1e-8)
          << EnvName(spec.variant) << " trial " << trial;
    }
  }
}

TEST(DynamicsTest, IntegratorIsFourthOrder) {
  const EnvSpec spec = EnvSpec::DoublePendulum();
  VectorXd x(4);
  x << 1.0, -0.5, 1.0, 0.5;
  const VectorXd u = VectorXd::Zero(2);
  const VectorXd ref = IntegrateInterval(spec, x, u, 640);
  const double e1 = (IntegrateInterval(spec, x, u, 5) - ref).norm();
  const double e2 = (IntegrateInterval(spec, x, u, 10) - ref).norm();
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.5);
}

TEST(DynamicsTest, ControlsAreClamped) {
  const EnvSpec spec = EnvSpec::CartPole();
  bool clamped = false;
  const VectorXd a = SimulateStep(
      spec, VectorXd::Zero(4), VectorXd::Constant(1, 50.0), nullptr, &clamped);
  EXPECT_TRUE(clamped);
  const VectorXd b = SimulateStep(
      spec, VectorXd::Zero(4), VectorXd::Constant(1, 10.0), nullptr, &clamped);
  EXPECT_FALSE(clamped);
  EXPECT_EQ((a - b).norm(), 0.0);
}

TEST(EpisodeTest, ShapesAndDeterminism) {
  for (const EnvSpec& spec : {EnvSpec::CartPole(), EnvSpec::DoublePendulum()}) {
    const Episode a = RunEpisode(spec, nullptr, 42);
    const Episode b = RunEpisode(spec, nullptr, 42);
    const Episode c = RunEpisode(spec, nullptr, 43);
    EXPECT_EQ(a.states.rows(), 26);
    EXPECT_EQ(a.states.cols(), 4);
    EXPECT_EQ(a.controls.rows(), 25);
    EXPECT_EQ(a.controls.cols(), spec.control_dim());
    EXPECT_EQ(a.seed, 42u);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.controls, b.controls);
    EXPECT_NE(a.states, c.states);
    for (int t = 0; t < a.steps(); ++t)
      EXPECT_TRUE((a.controls.row(t).transpose().cwiseAbs().array() <=
                   spec.u_max.array())
                      .all());
  }
}

TEST(EpisodeTest, PolicyControlsRecordedWithinLimits) {
  const EnvSpec spec = EnvSpec::CartPole();
  // A steep linear policy that saturates often.
  Policy policy = Policy::Linear(spec.features().feature_dim(), 1, spec.u_max);
  VectorXd theta = VectorXd::Constant(policy.num_params(), 50.0);
  policy.SetParams(theta);
  const Episode ep = RunEpisode(spec, &policy, 3);
  EXPECT_LE(ep.controls.cwiseAbs().maxCoeff(), spec.u_max(0));
}

Episode Pinned(const EnvSpec& spec, const VectorXd& state) {
  Episode ep;
  const int steps = spec.horizon_steps();
  ep.states = state.transpose().replicate(steps + 1, 1);
  ep.controls = MatrixXd::Zero(steps, spec.control_dim());
  return ep;
}

TEST(SuccessTest, PinnedAtTarget) {
  const EnvSpec cp = EnvSpec::CartPole();
  VectorXd up = VectorXd::Zero(4);
  up(2) = kPi;
  EXPECT_TRUE(Success(Pinned(cp, up), cp));
  EXPECT_FALSE(Success(Pinned(cp, VectorXd::Zero(4)), cp));
  const EnvSpec dp = EnvSpec::DoublePendulum();
  EXPECT_TRUE(Success(Pinned(dp, VectorXd::Zero(4)), dp));
  EXPECT_FALSE(Success(Pinned(dp, dp.init_mean), dp));
}

TEST(SuccessTest, BoundaryIsInclusive) {
  EnvSpec cp = EnvSpec::CartPole();
  VectorXd x = VectorXd::Zero(4);
  x(2) = kPi;
  x(0) = 0.25;  // pole upright, cart displaced by sigma_c
  const Episode ep = Pinned(cp, x);
  cp.sigma_c = TipDistances(ep, cp)(0);
  EXPECT_NEAR(cp.sigma_c, 0.25, 1e-15);
  EXPECT_TRUE(Success(ep, cp));
  cp.sigma_c = std::nextafter(cp.sigma_c, 0.0);
  EXPECT_FALSE(Success(ep, cp));
}

TEST(SuccessTest, OnlyLateWindowCounts) {
  const EnvSpec cp = EnvSpec::CartPole();
  VectorXd up = VectorXd::Zero(4);
  up(2) = kPi;
  Episode ep = Pinned(cp, up);
  ep.states.topRows(20).setZero();  // hanging until t = 1.9 s
  EXPECT_TRUE(Success(ep, cp));
  ep.states.row(20).setZero();  // hanging at t = 2.0 s
  EXPECT_FALSE(Success(ep, cp));
}

TEST(SuccessTest, RandomControlRarelySucceeds) {
  for (const EnvSpec& spec : {EnvSpec::CartPole(), EnvSpec::DoublePendulum()}) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      wins += Success(RunEpisode(spec, nullptr, seed), spec) ? 1 : 0;
    EXPECT_LE(wins, 1) << EnvName(spec.variant);
  }
}

}  // namespace
}  // namespace pilco
