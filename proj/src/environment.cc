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

#include <cmath>
#include <numbers>

namespace pilco {

std::string EnvName(EnvVariant v) {
  return v == EnvVariant::kCartPole ? "cartpole" : "double_pendulum";
}

EnvVariant ParseEnv(const std::string& name) {
  if (name == "cartpole") return EnvVariant::kCartPole;
  if (name == "double_pendulum") return EnvVariant::kDoublePendulum;
  throw DomainError("unknown environment: " + name);
}

EnvSpec EnvSpec::CartPole() {
  EnvSpec s;
  s.variant = EnvVariant::kCartPole;
  s.noise_var = VectorXd::Constant(4, 0.01 * 0.01);
  s.u_max = VectorXd::Constant(1, 10.0);
  s.init_mean = VectorXd::Zero(4);
  s.init_cov = 0.01 * MatrixXd::Identity(4, 4);
  s.sigma_c = 0.25;
  s.angle_dims = {2};
  return s;
}

EnvSpec EnvSpec::DoublePendulum() {
  EnvSpec s;
  s.variant = EnvVariant::kDoublePendulum;
  s.noise_var = VectorXd::Constant(4, 0.01 * 0.01);
  s.u_max = VectorXd::Constant(2, 3.0);
  s.init_mean = VectorXd::Zero(4);
  s.init_mean << std::numbers::pi, std::numbers::pi, 0.0, 0.0;
  s.init_cov = 0.01 * MatrixXd::Identity(4, 4);
  s.sigma_c = 0.5;
  s.angle_dims = {0, 1};
  return s;
}

int EnvSpec::horizon_steps() const {
  return static_cast<int>(std::lround(horizon_seconds / dt_control));
}

void EnvSpec::Validate() const {
  if (!(dt_control > 0.0) || substeps < 1)
    throw DomainError("EnvSpec: dt_control and substeps must be positive");
  if (!(gravity > 0.0)) throw DomainError("EnvSpec: gravity must be positive");
  if (variant == EnvVariant::kCartPole) {
    if (!(cart_mass > 0.0 && pole_mass > 0.0 && pole_length > 0.0) ||
        friction < 0.0)
      throw DomainError("EnvSpec: invalid cart-pole parameters");
    if (init_mean.size() != 4 || u_max.size() != 1)
      throw DomainError("EnvSpec: cart-pole has 4 states and 1 control");
  } else {
    if (!(mass1 > 0.0 && mass2 > 0.0 && length1 > 0.0 && length2 > 0.0))
      throw DomainError("EnvSpec: invalid double-pendulum parameters");
    if (init_mean.size() != 4 || u_max.size() != 2)
      throw DomainError("EnvSpec: double pendulum has 4 states, 2 controls");
  }
  if (noise_var.size() != state_dim() || (noise_var.array() < 0.0).any())
    throw DomainError("EnvSpec: noise_var must be nonnegative per state");
  if (init_cov.rows() != state_dim() || init_cov.cols() != state_dim())
    throw DomainError("EnvSpec: init_cov dimension");
  CheckCovariance(Symmetrized(init_cov), "EnvSpec init_cov");
  if (!(u_max.array() > 0.0).all())
    throw DomainError("EnvSpec: u_max must be positive");
  if (!(sigma_c > 0.0) || !(horizon_seconds > 0.0))
    throw DomainError("EnvSpec: sigma_c and horizon must be positive");
  for (int d : angle_dims)
    if (d < 0 || d >= state_dim()) throw DomainError("EnvSpec: angle index");
}

CostSpaceMap EnvSpec::cost_map() const {
  CostSpaceMap map;
  map.trig = features();
  map.offset = VectorXd::Zero(2);
  if (variant == EnvVariant::kCartPole) {
    // Features [x, x_dot, theta_dot, sin theta, cos theta].
    map.lin = MatrixXd::Zero(2, 5);
    map.lin(0, 0) = 1.0;
    map.lin(0, 3) = pole_length;
    map.lin(1, 4) = -pole_length;
  } else {
    // Features [theta1_dot, theta2_dot, sin1, cos1, sin2, cos2].
    map.lin = MatrixXd::Zero(2, 6);
    map.lin(0, 2) = length1;
    map.lin(0, 4) = length2;
    map.lin(1, 3) = length1;
    map.lin(1, 5) = length2;
  }
  return map;
}

VectorXd EnvSpec::target() const {
  VectorXd t(2);
  if (variant == EnvVariant::kCartPole)
    t << 0.0, pole_length;
  else
    t << 0.0, length1 + length2;
  return t;
}

CostConfig EnvSpec::cost_config(double ucb_kappa) const {
  CostConfig cfg = CostConfig::Selector(target(), VectorXd::Ones(2), sigma_c);
  cfg.ucb_kappa = ucb_kappa;
  return cfg;
}

VectorXd StateDerivative(const EnvSpec& spec, const VectorXd& x,
                         const VectorXd& u) {
  VectorXd dx(4);
  const double g = spec.gravity;
  if (spec.variant == EnvVariant::kCartPole) {
    const double big_m = spec.cart_mass, m = spec.pole_mass;
    const double l = spec.pole_length;
    const double s = std::sin(x(2)), c = std::cos(x(2));
    const double f = u(0) - spec.friction * x(1);
    const double xdd =
        (4.0 * f + 3.0 * m * g * s * c + 2.0 * m * l * x(3) * x(3) * s) /
        (4.0 * (big_m + m) - 3.0 * m * c * c);
    const double tdd = -3.0 / (2.0 * l) * (c * xdd + g * s);
    dx << x(1), xdd, x(3), tdd;
    return dx;
  }
  const double m1 = spec.mass1, m2 = spec.mass2;
  const double l1 = spec.length1, l2 = spec.length2;
  const double delta = x(0) - x(1);
  const double h = 0.5 * m2 * l1 * l2;
  const double a11 = m1 * l1 * l1 / 3.0 + m2 * l1 * l1;
  const double a22 = m2 * l2 * l2 / 3.0;
  const double a12 = h * std::cos(delta);
  const double r1 = u(0) - u(1) - h * std::sin(delta) * x(3) * x(3) +
                    (0.5 * m1 + m2) * g * l1 * std::sin(x(0));
  const double r2 = u(1) + h * std::sin(delta) * x(2) * x(2) +
                    0.5 * m2 * g * l2 * std::sin(x(1));
  const double det = a11 * a22 - a12 * a12;
  dx << x(2), x(3), (a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det;
  return dx;
}

VectorXd IntegrateInterval(const EnvSpec& spec, const VectorXd& x,
                           const VectorXd& u, int substeps) {
  const double h = spec.dt_control / substeps;
  VectorXd y = x;
  for (int i = 0; i < substeps; ++i) {
    const VectorXd k1 = StateDerivative(spec, y, u);
    const VectorXd k2 = StateDerivative(spec, y + 0.5 * h * k1, u);
    const VectorXd k3 = StateDerivative(spec, y + 0.5 * h * k2, u);
    const VectorXd k4 = StateDerivative(spec, y + h * k3, u);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

double MechanicalEnergy(const EnvSpec& spec, const VectorXd& x) {
  const double g = spec.gravity;
  if (spec.variant == EnvVariant::kCartPole) {
    const double big_m = spec.cart_mass, m = spec.pole_mass;
    const double l = spec.pole_length;
    const double s = std::sin(x(2)), c = std::cos(x(2));
    const double vx = x(1) + 0.5 * l * c * x(3);
    const double vy = 0.5 * l * s * x(3);
    return 0.5 * big_m * x(1) * x(1) + 0.5 * m * (vx * vx + vy * vy) +
           0.5 * (m * l * l / 12.0) * x(3) * x(3) - m * g * 0.5 * l * c;
  }
  const double m1 = spec.mass1, m2 = spec.mass2;
  const double l1 = spec.length1, l2 = spec.length2;
  const double w1 = x(2), w2 = x(3);
  const double v2sq = l1 * l1 * w1 * w1 + 0.25 * l2 * l2 * w2 * w2 +
                      l1 * l2 * w1 * w2 * std::cos(x(0) - x(1));
  const double kinetic = 0.5 * (m1 * l1 * l1 / 3.0) * w1 * w1 +
                         0.5 * m2 * v2sq +
                         0.5 * (m2 * l2 * l2 / 12.0) * w2 * w2;
  const double potential =
      m1 * g * 0.5 * l1 * std::cos(x(0)) +
      m2 * g * (l1 * std::cos(x(0)) + 0.5 * l2 * std::cos(x(1)));
  return kinetic + potential;
}

VectorXd SimulateStep(const EnvSpec& spec, const VectorXd& x, const VectorXd& u,
                      std::mt19937_64* rng, bool* clamped) {
  const VectorXd uc = u.cwiseMax(-spec.u_max).cwiseMin(spec.u_max);
  if (clamped) *clamped = (uc - u).cwiseAbs().maxCoeff() > 0.0;
  VectorXd next = IntegrateInterval(spec, x, uc, spec.substeps);
  if (rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < next.size(); ++i)
      next(i) += std::sqrt(spec.noise_var(i)) * normal(*rng);
  }
  if (!next.allFinite()) throw NumericalError("SimulateStep: non-finite state");
  return next;
}

Episode RunEpisode(const EnvSpec& spec, const Policy* policy,
                   std::uint64_t seed) {
  const int steps = spec.horizon_steps();
  const int d = spec.state_dim(), f = spec.control_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  const Eigen::LDLT<MatrixXd> ldlt(spec.init_cov);
  VectorXd xi(d);
  for (int i = 0; i < d; ++i) xi(i) = normal(rng);
  // Square root of the PSD initial covariance via LDL^T.
  VectorXd scaled = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().cwiseProduct(xi);
  VectorXd x = spec.init_mean +
               ldlt.transpositionsP().transpose() * (ldlt.matrixL() * scaled);

  const TrigFeatures feat = spec.features();
  Episode ep;
  ep.seed = seed;
  ep.states.resize(steps + 1, d);
  ep.controls.resize(steps, f);
  ep.states.row(0) = x.transpose();
  for (int t = 0; t < steps; ++t) {
    VectorXd u(f);
    if (policy) {
      u = policy->Control(feat.Apply(x));
    } else {
      for (int a = 0; a < f; ++a) u(a) = spec.u_max(a) * unif(rng);
    }
    bool clamped = false;
    x = SimulateStep(spec, x, u, &rng, &clamped);
    if (clamped) ++ep.clamp_count;
    ep.controls.row(t) =
        u.cwiseMax(-spec.u_max).cwiseMin(spec.u_max).transpose();
    ep.states.row(t + 1) = x.transpose();
  }
  return ep;
}

VectorXd TipDistances(const Episode& episode, const EnvSpec& spec) {
  const CostSpaceMap map = spec.cost_map();
  const VectorXd target = spec.target();
  VectorXd out(episode.states.rows());
  for (int t = 0; t < episode.states.rows(); ++t)
    out(t) = (map.Apply(episode.states.row(t).transpose()) - target).norm();
  return out;
}

bool Success(const Episode& episode, const EnvSpec& spec) {
  const VectorXd dist = TipDistances(episode, spec);
  bool any = false;
  for (int t = 0; t < dist.size(); ++t) {
    const double time = t * spec.dt_control;
    if (time < spec.success_start - 1e-9 || time > spec.horizon_seconds + 1e-9)
      continue;
    any = true;
    if (!(dist(t) <= spec.sigma_c)) return false;
  }
  return any;
}

}  // namespace pilco
