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

#include "pilco/gaussian.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace pilco {

void CheckCovariance(const MatrixXd& cov, const char* what) {
  if (cov.rows() != cov.cols())
    throw DomainError(std::string(what) + ": covariance is not square");
  if (!cov.allFinite())
    throw DomainError(std::string(what) + ": covariance is not finite");
  if (cov.size() == 0) return;
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), 1e-300);
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError(std::string(what) + ": covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double tol = 1e-10 * std::max(std::abs(cov.trace()), 1e-300);
  if (eig.eigenvalues().minCoeff() < -tol)
    throw DomainError(std::string(what) + ": covariance is not PSD (min eig " +
                      std::to_string(eig.eigenvalues().minCoeff()) + ")");
}

GaussianBelief::GaussianBelief(VectorXd mean, MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw DomainError("GaussianBelief: mean/cov dimension mismatch");
  if (!mean_.allFinite()) throw DomainError("GaussianBelief: mean not finite");
  cov_ = Symmetrized(cov_);
  CheckCovariance(cov_, "GaussianBelief");
}

GaussianBelief GaussianBelief::Point(const VectorXd& mean) {
  return GaussianBelief(mean, MatrixXd::Zero(mean.size(), mean.size()));
}

TrigMoments TrigMean(double mu, double var, int k) {
  if (!(var >= 0.0)) throw DomainError("TrigMean: negative variance");
  if (k <= 0) throw DomainError("TrigMean: harmonic must be positive");
  const double e = std::exp(-0.5 * k * k * var);
  return {e * std::sin(k * mu), e * std::cos(k * mu)};
}

TrigSecondMoments TrigSecond(double mu, double var) {
  if (!(var >= 0.0)) throw DomainError("TrigSecond: negative variance");
  const double e = std::exp(-2.0 * var);
  return {0.5 * (1.0 - e * std::cos(2.0 * mu)),
          0.5 * (1.0 + e * std::cos(2.0 * mu)), 0.5 * e * std::sin(2.0 * mu)};
}

double JointSinSinMoment(const Eigen::Vector2d& mean,
                         const Eigen::Matrix2d& cov, int ka, int kb) {
  CheckCovariance(Symmetrized(cov), "JointSinSinMoment");
  if (ka <= 0 || kb <= 0)
    throw DomainError("JointSinSinMoment: harmonics must be positive");
  // sin A sin B = (cos(A - B) - cos(A + B)) / 2 with A, B jointly Gaussian.
  const double va = ka * ka * cov(0, 0), vb = kb * kb * cov(1, 1);
  const double cab = ka * kb * 0.5 * (cov(0, 1) + cov(1, 0));
  const double ma = ka * mean(0), mb = kb * mean(1);
  const double vm = std::max(va + vb - 2.0 * cab, 0.0);
  const double vp = std::max(va + vb + 2.0 * cab, 0.0);
  return 0.5 * (std::exp(-0.5 * vm) * std::cos(ma - mb) -
                std::exp(-0.5 * vp) * std::cos(ma + mb));
}

namespace {

// Row-major Kronecker product.
MatrixXd Kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

StageMoments PropagateSin(const SinMap& map, const VectorXd& m,
                          const MatrixXd& s, bool derivatives) {
  const int k = static_cast<int>(m.size());
  const int kp = static_cast<int>(map.lin.rows());
  const int o = static_cast<int>(map.weights.rows());
  if (map.lin.cols() != k || map.phase.size() != kp ||
      map.weights.cols() != kp || s.rows() != k || s.cols() != k)
    throw DomainError("PropagateSin: dimension mismatch");

  const VectorXd my = map.lin * m + map.phase;
  const MatrixXd sy = map.lin * s * map.lin.transpose();

  VectorXd mg(kp), cg(kp);
  for (int i = 0; i < kp; ++i) {
    const double e = std::exp(-0.5 * sy(i, i));
    mg(i) = e * std::sin(my(i));
    cg(i) = e * std::cos(my(i));
  }

  // Second moments E[g_i g_j] and their derivatives in y-space.
  MatrixXd eg(kp, kp);
  MatrixXd de_dmy, de_dsy;
  if (derivatives) {
    de_dmy = MatrixXd::Zero(kp * kp, kp);
    de_dsy = MatrixXd::Zero(kp * kp, kp * kp);
  }
  for (int i = 0; i < kp; ++i) {
    for (int j = 0; j < kp; ++j) {
      const int row = Flat(i, j, kp);
      if (i == j) {
        const double e2 = std::exp(-2.0 * sy(i, i));
        eg(i, i) = 0.5 * (1.0 - e2 * std::cos(2.0 * my(i)));
        if (derivatives) {
          de_dmy(row, i) = e2 * std::sin(2.0 * my(i));
          de_dsy(row, Flat(i, i, kp)) = e2 * std::cos(2.0 * my(i));
        }
        continue;
      }
      const double em = std::exp(-0.5 * (sy(i, i) + sy(j, j) - 2.0 * sy(i, j)));
      const double ep = std::exp(-0.5 * (sy(i, i) + sy(j, j) + 2.0 * sy(i, j)));
      const double cm = std::cos(my(i) - my(j)), cp = std::cos(my(i) + my(j));
      const double sm = std::sin(my(i) - my(j)), sp = std::sin(my(i) + my(j));
      eg(i, j) = 0.5 * (em * cm - ep * cp);
      if (derivatives) {
        de_dmy(row, i) = 0.5 * (-em * sm + ep * sp);
        de_dmy(row, j) = 0.5 * (em * sm + ep * sp);
        de_dsy(row, Flat(i, i, kp)) = -0.5 * eg(i, j);
        de_dsy(row, Flat(j, j, kp)) = -0.5 * eg(i, j);
        const double off = 0.25 * (em * cm + ep * cp);
        de_dsy(row, Flat(i, j, kp)) = off;
        de_dsy(row, Flat(j, i, kp)) = off;
      }
    }
  }
  const MatrixXd cov_g = eg - mg * mg.transpose();

  StageMoments out;
  out.mean = map.weights * mg;
  out.cov = Symmetrized(map.weights * cov_g * map.weights.transpose());
  out.coef = map.lin.transpose() * cg.asDiagonal() * map.weights.transpose();
  if (!derivatives) return out;
  out.has_derivatives = true;

  // Mean derivatives in y-space.
  MatrixXd dmg_dmy = MatrixXd::Zero(kp, kp);
  MatrixXd dmg_dsy = MatrixXd::Zero(kp, kp * kp);
  for (int i = 0; i < kp; ++i) {
    dmg_dmy(i, i) = cg(i);
    dmg_dsy(i, Flat(i, i, kp)) = -0.5 * mg(i);
  }
  // Covariance derivatives: d(E - mg mg^T).
  MatrixXd dc_dmy = de_dmy, dc_dsy = de_dsy;
  for (int i = 0; i < kp; ++i) {
    for (int j = 0; j < kp; ++j) {
      const int row = Flat(i, j, kp);
      dc_dmy.row(row) -= dmg_dmy.row(i) * mg(j) + mg(i) * dmg_dmy.row(j);
      dc_dsy.row(row) -= dmg_dsy.row(i) * mg(j) + mg(i) * dmg_dsy.row(j);
    }
  }
  // Coefficient derivatives: coef_ra = sum_i L_ir cg_i W_ai.
  MatrixXd dcoef_dmy = MatrixXd::Zero(k * o, kp);
  MatrixXd dcoef_dsy = MatrixXd::Zero(k * o, kp * kp);
  for (int r = 0; r < k; ++r) {
    for (int a = 0; a < o; ++a) {
      for (int i = 0; i < kp; ++i) {
        const double lw = map.lin(i, r) * map.weights(a, i);
        if (lw == 0.0) continue;
        dcoef_dmy(Flat(r, a, o), i) += -lw * mg(i);
        dcoef_dsy(Flat(r, a, o), Flat(i, i, kp)) += -0.5 * lw * cg(i);
      }
    }
  }

  const MatrixXd ww = Kron(map.weights, map.weights);
  const MatrixXd ll = Kron(map.lin, map.lin);
  out.dmean_dm = map.weights * dmg_dmy * map.lin;
  out.dmean_ds = map.weights * dmg_dsy * ll;
  out.dcov_dm = ww * dc_dmy * map.lin;
  out.dcov_ds = ww * dc_dsy * ll;
  out.dcoef_dm = dcoef_dmy * map.lin;
  out.dcoef_ds = dcoef_dsy * ll;
  return out;
}

StageMoments PropagateLinear(const MatrixXd& a, const VectorXd& b,
                             const VectorXd& m, const MatrixXd& s,
                             bool derivatives) {
  const int k = static_cast<int>(m.size());
  const int o = static_cast<int>(a.rows());
  if (a.cols() != k || b.size() != o || s.rows() != k || s.cols() != k)
    throw DomainError("PropagateLinear: dimension mismatch");
  StageMoments out;
  out.mean = a * m + b;
  out.cov = Symmetrized(a * s * a.transpose());
  out.coef = a.transpose();
  if (!derivatives) return out;
  out.has_derivatives = true;
  out.dmean_dm = a;
  out.dmean_ds = MatrixXd::Zero(o, k * k);
  out.dcov_dm = MatrixXd::Zero(o * o, k);
  out.dcov_ds = Kron(a, a);
  SymmetrizeCovColumns(&out.dcov_ds, k);
  out.dcoef_dm = MatrixXd::Zero(k * o, k);
  out.dcoef_ds = MatrixXd::Zero(k * o, k * k);
  return out;
}

TrigFeatures::TrigFeatures(int state_dim, std::vector<int> angle_dims)
    : state_dim_(state_dim), angle_dims_(std::move(angle_dims)) {
  std::vector<bool> is_angle(state_dim_, false);
  for (int d : angle_dims_) {
    if (d < 0 || d >= state_dim_ || is_angle[d])
      throw DomainError("TrigFeatures: invalid angle index");
    is_angle[d] = true;
  }
  for (int d = 0; d < state_dim_; ++d)
    if (!is_angle[d]) plain_dims_.push_back(d);
}

VectorXd TrigFeatures::Apply(const VectorXd& x) const {
  VectorXd out(feature_dim());
  int i = 0;
  for (int d : plain_dims_) out(i++) = x(d);
  for (int d : angle_dims_) {
    out(i++) = std::sin(x(d));
    out(i++) = std::cos(x(d));
  }
  return out;
}

SinMap TrigFeatures::AngleMap() const {
  const int na = static_cast<int>(angle_dims_.size());
  SinMap map;
  map.lin = MatrixXd::Zero(2 * na, na);
  map.phase = VectorXd::Zero(2 * na);
  map.weights = MatrixXd::Identity(2 * na, 2 * na);
  for (int i = 0; i < na; ++i) {
    map.lin(2 * i, i) = 1.0;
    map.lin(2 * i + 1, i) = 1.0;
    map.phase(2 * i + 1) = std::numbers::pi / 2.0;
  }
  return map;
}

}  // namespace pilco
