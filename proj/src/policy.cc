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

#include "pilco/policy.h"

#include <cmath>
#include <string>

#include "pilco/gp.h"
#include "pilco/joint_belief.h"

namespace pilco {

std::string VariantName(PolicyVariant v) {
  return v == PolicyVariant::kLinear ? "linear" : "rbf";
}

PolicyVariant ParseVariant(const std::string& name) {
  if (name == "linear") return PolicyVariant::kLinear;
  if (name == "rbf") return PolicyVariant::kRbf;
  throw DomainError("unknown policy variant: " + name);
}

double Squash(double z) {
  return 9.0 / 8.0 * std::sin(z) + 1.0 / 8.0 * std::sin(3.0 * z);
}

int Policy::ParamCount(PolicyVariant variant, int input_dim, int control_dim,
                       int num_basis) {
  if (variant == PolicyVariant::kLinear) return control_dim * (input_dim + 1);
  return num_basis * input_dim + control_dim * input_dim +
         num_basis * control_dim;
}

namespace {

void CheckLimits(const VectorXd& u_max, int control_dim) {
  if (u_max.size() != control_dim)
    throw DomainError("Policy: u_max dimension mismatch");
  if (!(u_max.array() > 0.0).all())
    throw DomainError("Policy: u_max must be positive");
}

}  // namespace

Policy Policy::Linear(int input_dim, int control_dim, const VectorXd& u_max) {
  CheckLimits(u_max, control_dim);
  Policy p;
  p.variant_ = PolicyVariant::kLinear;
  p.input_dim_ = input_dim;
  p.control_dim_ = control_dim;
  p.u_max_ = u_max;
  p.theta_ = VectorXd::Zero(ParamCount(p.variant_, input_dim, control_dim, 0));
  return p;
}

Policy Policy::Rbf(int input_dim, int control_dim, int num_basis,
                   const VectorXd& u_max) {
  CheckLimits(u_max, control_dim);
  if (num_basis < 1) throw DomainError("Policy: need at least one basis");
  Policy p;
  p.variant_ = PolicyVariant::kRbf;
  p.input_dim_ = input_dim;
  p.control_dim_ = control_dim;
  p.num_basis_ = num_basis;
  p.u_max_ = u_max;
  p.theta_ =
      VectorXd::Zero(ParamCount(p.variant_, input_dim, control_dim, num_basis));
  p.Refresh();
  return p;
}

void Policy::SetParams(const VectorXd& theta) {
  if (theta.size() != theta_.size())
    throw DomainError("Policy::SetParams: expected " +
                      std::to_string(theta_.size()) + " parameters");
  theta_ = theta;
  Refresh();
}

MatrixXd Policy::centers() const {
  return Unvec(theta_.head(num_basis_ * input_dim_), num_basis_, input_dim_);
}

MatrixXd Policy::log_lengths() const {
  return Unvec(
      theta_.segment(num_basis_ * input_dim_, control_dim_ * input_dim_),
      control_dim_, input_dim_);
}

MatrixXd Policy::targets() const {
  return Unvec(theta_.tail(num_basis_ * control_dim_), num_basis_,
               control_dim_);
}

void Policy::Refresh() {
  if (variant_ != PolicyVariant::kRbf) return;
  const MatrixXd c = centers(), ll = log_lengths(), t = targets();
  alpha_.resize(num_basis_, control_dim_);
  kn_llt_.clear();
  kmat_.clear();
  for (int a = 0; a < control_dim_; ++a) {
    GpHyperparams hp;
    hp.length_scales = ll.row(a).transpose().array().exp();
    hp.signal_var = kRbfSignalVar;
    hp.noise_var = kRbfNoiseVar;
    MatrixXd k = SeKernelMatrix(c, c, hp);
    MatrixXd kn = k;
    kn.diagonal().array() += kRbfNoiseVar;
    kn_llt_.push_back(CholeskyOrThrow(kn, "rbf policy kernel matrix"));
    alpha_.col(a) = kn_llt_.back().solve(t.col(a));
    kmat_.push_back(std::move(k));
  }
}

SeExpansion Policy::Expansion() const {
  SeExpansion ex;
  ex.centers = centers();
  ex.weights = alpha_;
  ex.log_lengths = log_lengths();
  ex.signal_var = VectorXd::Constant(control_dim_, kRbfSignalVar);
  ex.noise_var = VectorXd::Zero(control_dim_);
  return ex;
}

VectorXd Policy::Prelim(const VectorXd& x) const {
  if (x.size() != input_dim_) throw DomainError("Policy: input dimension");
  if (variant_ == PolicyVariant::kLinear) {
    const MatrixXd a =
        Unvec(theta_.head(control_dim_ * input_dim_), control_dim_, input_dim_);
    return a * x + theta_.tail(control_dim_);
  }
  const MatrixXd c = centers(), ll = log_lengths();
  VectorXd out(control_dim_);
  for (int a = 0; a < control_dim_; ++a) {
    const VectorXd inv_l = (-ll.row(a).transpose()).array().exp();
    const MatrixXd d = (c.rowwise() - x.transpose()) * inv_l.asDiagonal();
    const VectorXd k =
        (kRbfSignalVar * (-0.5 * d.rowwise().squaredNorm()).array().exp())
            .matrix();
    out(a) = k.dot(alpha_.col(a));
  }
  return out;
}

VectorXd Policy::Control(const VectorXd& x) const {
  const VectorXd z = Prelim(x);
  VectorXd u(control_dim_);
  for (int a = 0; a < control_dim_; ++a) u(a) = u_max_(a) * Squash(z(a));
  return u;
}

SinMap Policy::SquashMap(const VectorXd& u_max) {
  const int f = static_cast<int>(u_max.size());
  SinMap map;
  map.lin.resize(2 * f, f);
  map.lin << MatrixXd::Identity(f, f), 3.0 * MatrixXd::Identity(f, f);
  map.phase = VectorXd::Zero(2 * f);
  map.weights.resize(f, 2 * f);
  map.weights << 9.0 / 8.0 * MatrixXd(u_max.asDiagonal()),
      1.0 / 8.0 * MatrixXd(u_max.asDiagonal());
  return map;
}

StageMoments Policy::PrelimStage(const VectorXd& m, const MatrixXd& s,
                                 bool derivatives) const {
  const int k = input_dim_, f = control_dim_, np = num_params();
  if (variant_ == PolicyVariant::kLinear) {
    const MatrixXd a = Unvec(theta_.head(f * k), f, k);
    StageMoments st = PropagateLinear(a, theta_.tail(f), m, s, derivatives);
    if (!derivatives) return st;
    st.dmean_dp = MatrixXd::Zero(f, np);
    st.dcov_dp = MatrixXd::Zero(f * f, np);
    st.dcoef_dp = MatrixXd::Zero(k * f, np);
    const MatrixXd sa = s * a.transpose();  // k x f
    for (int r = 0; r < f; ++r) {
      for (int j = 0; j < k; ++j) {
        const int col = Flat(r, j, k);
        st.dmean_dp(r, col) = m(j);
        st.dcoef_dp(Flat(j, r, f), col) = 1.0;
        for (int b = 0; b < f; ++b) {
          st.dcov_dp(Flat(r, b, f), col) += sa(j, b);
          st.dcov_dp(Flat(b, r, f), col) += sa(j, b);
        }
      }
      st.dmean_dp(r, f * k + r) = 1.0;
    }
    return st;
  }

  const SeExpansion ex = Expansion();
  StageMoments raw = SeMomentMatch(ex, m, s, derivatives, derivatives);
  if (!derivatives) return raw;

  // Chain the expansion parameters (centers, log lengths, weights alpha)
  // to theta (centers, log lengths, targets) through
  // alpha_a = (K_a + noise I)^{-1} t_a.
  const int n = num_basis_;
  const int off_l = n * k, off_t = n * k + f * k;
  const int raw_b = n * k + f * k;
  const MatrixXd c = centers(), ll = log_lengths();
  const int rows_mean = f, rows_cov = f * f, rows_coef = k * f;
  MatrixXd* blocks[3] = {&raw.dmean_dp, &raw.dcov_dp, &raw.dcoef_dp};
  const int block_rows[3] = {rows_mean, rows_cov, rows_coef};
  for (int bi = 0; bi < 3; ++bi) {
    const MatrixXd& src = *blocks[bi];
    MatrixXd dst = MatrixXd::Zero(block_rows[bi], np);
    dst.leftCols(n * k + f * k) = src.leftCols(n * k + f * k);
    for (int a = 0; a < f; ++a) {
      // g: n x rows, d y / d alpha_a.
      const MatrixXd g = src.middleCols(raw_b + a * n, n).transpose();
      if (g.isZero(0.0)) continue;
      const MatrixXd v = kn_llt_[a].solve(g);
      const VectorXd inv_l2 = (-2.0 * ll.row(a).transpose()).array().exp();
      const VectorXd& al = alpha_.col(a);
      for (int y = 0; y < block_rows[bi]; ++y) {
        for (int i = 0; i < n; ++i) dst(y, off_t + i * f + a) = v(i, y);
        // K path: dy = -v^T dK alpha.
        const MatrixXd wm = (v.col(y) * al.transpose()).cwiseProduct(kmat_[a]);
        const MatrixXd ws = wm + wm.transpose();
        const VectorXd rs = ws.rowwise().sum();
        const MatrixXd wsc = ws * c;
        for (int i = 0; i < n; ++i)
          dst.block(y, i * k, 1, k) +=
              ((rs(i) * c.row(i) - wsc.row(i)).array() *
               inv_l2.transpose().array())
                  .matrix();
        const VectorXd rsm = wm.rowwise().sum();
        const VectorXd csm = wm.colwise().sum().transpose();
        for (int l = 0; l < k; ++l) {
          const VectorXd x = c.col(l);
          const double d2 = rsm.dot(x.cwiseProduct(x)) +
                            csm.dot(x.cwiseProduct(x)) - 2.0 * x.dot(wm * x);
          dst(y, off_l + a * k + l) -= d2 * inv_l2(l);
        }
      }
    }
    *blocks[bi] = std::move(dst);
  }
  return raw;
}

ControlMoments SquashMoments(const VectorXd& z_mean, const MatrixXd& z_cov,
                             const MatrixXd& input_prelim_cross_cov,
                             const VectorXd& u_max) {
  CheckCovariance(Symmetrized(z_cov), "SquashMoments");
  const StageMoments st =
      PropagateSin(Policy::SquashMap(u_max), z_mean, Symmetrized(z_cov), false);
  ControlMoments cm;
  cm.u_mean = st.mean;
  cm.u_cov = st.cov;
  cm.state_control_cross_cov = input_prelim_cross_cov * st.coef;
  return cm;
}

ControlMoments ComputeControlMoments(const Policy& policy,
                                     const GaussianBelief& input,
                                     bool derivatives) {
  const int k = policy.input_dim(), f = policy.control_dim();
  const int np = policy.num_params();
  if (input.dim() != k) throw DomainError("ComputeControlMoments: dimension");
  std::vector<int> x_idx(k);
  for (int i = 0; i < k; ++i) x_idx[i] = i;

  JointBelief joint = [&] {
    if (!derivatives) return JointBelief(input.mean(), input.cov());
    const int nb = k + k * k + np;
    MatrixXd dm = MatrixXd::Zero(k, nb);
    dm.leftCols(k).setIdentity();
    MatrixXd ds = MatrixXd::Zero(k * k, nb);
    ds.middleCols(k, k * k) = CovSeed(k);
    return JointBelief(input.mean(), input.cov(), dm, ds);
  }();
  const std::vector<int> z_idx = joint.Append(
      x_idx, policy.PrelimStage(input.mean(), input.cov(), derivatives),
      k + k * k);
  const std::vector<int> u_idx =
      joint.Append(z_idx, PropagateSin(Policy::SquashMap(policy.u_max()),
                                       joint.SubMean(z_idx),
                                       joint.SubCov(z_idx), derivatives));

  ControlMoments cm;
  cm.u_mean = joint.SubMean(u_idx);
  cm.u_cov = joint.SubCov(u_idx);
  cm.state_control_cross_cov = Gather(joint.cov(), x_idx, u_idx);
  if (!derivatives) return cm;
  cm.d_mean = joint.SubDMean(u_idx);
  cm.d_cov = joint.SubDCov(u_idx);
  const int n = joint.dim();
  cm.d_cross.resize(k * f, joint.num_columns());
  for (int r = 0; r < k; ++r)
    for (int a = 0; a < f; ++a)
      cm.d_cross.row(Flat(r, a, f)) = joint.dcov().row(Flat(r, u_idx[a], n));
  return cm;
}

}  // namespace pilco
