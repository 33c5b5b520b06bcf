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

// Simulated plants: cart-pole and a two-link pendulum with a motor at each
// joint. Controls are held constant over each control interval; Gaussian
// system noise is added once per interval.
//
// Cart-pole state: [x, x_dot, theta, theta_dot], theta measured from hanging
// down; the pole is a uniform rod of full length `pole_length` hinged on
// the cart.
// Double-pendulum state: [theta1, theta2, theta1_dot, theta2_dot], absolute
// link angles measured from upright; uniform rods.

#ifndef PILCO_ENVIRONMENT_H_
#define PILCO_ENVIRONMENT_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pilco/cost.h"
#include "pilco/policy.h"

namespace pilco {

enum class EnvVariant { kCartPole, kDoublePendulum };

std::string EnvName(EnvVariant v);
EnvVariant ParseEnv(const std::string& name);

struct EnvSpec {
  EnvVariant variant = EnvVariant::kCartPole;

  // Cart-pole.
  double cart_mass = 0.5;
  double pole_mass = 0.5;
  double pole_length = 0.5;
  double friction = 0.1;

  // Double pendulum.
  double mass1 = 0.5, mass2 = 0.5;
  double length1 = 1.0, length2 = 1.0;

  double gravity = 9.82;
  double dt_control = 0.1;
  int substeps = 100;
  VectorXd noise_var;  // per state dimension
  VectorXd u_max;
  VectorXd init_mean;
  MatrixXd init_cov;
  double sigma_c = 0.25;
  double horizon_seconds = 2.5;
  double success_start = 2.0;
  std::vector<int> angle_dims;

  static EnvSpec CartPole();
  static EnvSpec DoublePendulum();

  int state_dim() const { return static_cast<int>(init_mean.size()); }
  int control_dim() const { return static_cast<int>(u_max.size()); }
  int horizon_steps() const;

  // Feature map applied before the policy (and the dynamics model in trig
  // mode).
  TrigFeatures features() const { return {state_dim(), angle_dims}; }
  // State to tip position.
  CostSpaceMap cost_map() const;
  VectorXd target() const;
  CostConfig cost_config(double ucb_kappa = 0.0) const;

  // Throws DomainError on non-positive physical parameters or inconsistent
  // dimensions.
  void Validate() const;
};

// Time derivative of the state for a constant control.
VectorXd StateDerivative(const EnvSpec& spec, const VectorXd& x,
                         const VectorXd& u);

// RK4 over one control interval with `substeps` equal substeps, no noise.
VectorXd IntegrateInterval(const EnvSpec& spec, const VectorXd& x,
                           const VectorXd& u, int substeps);

// Total mechanical energy (for conservation checks).
double MechanicalEnergy(const EnvSpec& spec, const VectorXd& x);

// One control interval: clamps u to the limits (sets *clamped), integrates,
// adds N(0, diag(noise_var)) when rng is non-null.
VectorXd SimulateStep(const EnvSpec& spec, const VectorXd& x, const VectorXd& u,
                      std::mt19937_64* rng, bool* clamped = nullptr);

struct Episode {
  MatrixXd states;    // (steps + 1) x D
  MatrixXd controls;  // steps x F
  std::uint64_t seed = 0;
  int clamp_count = 0;

  int steps() const { return static_cast<int>(controls.rows()); }
};

// Runs horizon_steps() intervals from a draw of the initial distribution.
// With a null policy, controls are uniform in [-u_max, u_max].
Episode RunEpisode(const EnvSpec& spec, const Policy* policy,
                   std::uint64_t seed);

// Tip distance to target at every step.
VectorXd TipDistances(const Episode& episode, const EnvSpec& spec);

// True iff the tip is within sigma_c of the target (inclusive) at every
// recorded step with time in [success_start, horizon_seconds].
bool Success(const Episode& episode, const EnvSpec& spec);

}  // namespace pilco

#endif  // PILCO_ENVIRONMENT_H_
