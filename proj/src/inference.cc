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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace pilco {

std::string MethodName(InferenceMethod method) {
  return method == InferenceMethod::kMomentMatch ? "moment_match" : "linearize";
}

InferenceMethod ParseMethod(const std::string& name) {
  if (name == "moment_match") return InferenceMethod::kMomentMatch;
  if (name == "linearize") return InferenceMethod::kLinearize;
  throw DomainError("unknown inference method: " + name);
}

SeExpansion SeExpansion::FromModel(const GpModel& model, bool with_variance) {
  const int e = model.output_dim();
  const int q = model.input_dim();
  SeExpansion ex;
  ex.centers = model.inputs();
  ex.weights.resize(model.num_points(), e);
  ex.log_lengths.resize(e, q);
  ex.signal_var.resize(e);
  ex.noise_var.resize(e);
  for (int a = 0; a < e; ++a) {
    const GpOutput& out = model.output(a);
    ex.weights.col(a) = out.beta;
    ex.log_lengths.row(a) = out.hp.length_scales.array().log().transpose();
    ex.signal_var(a) = out.hp.signal_var;
    ex.noise_var(a) = out.hp.noise_var;
    if (with_variance) ex.k_inv.push_back(out.k_inv);
  }
  return ex;
}

int SeParamCount(const SeExpansion& ex) {
  const int n = ex.num_centers(), q = ex.input_dim(), e = ex.output_dim();
  return n * q + e * q + e * n;
}

namespace {

void CheckInput(const SeExpansion& ex, const VectorXd& m, const MatrixXd& s) {
  const int q = ex.input_dim();
  if (m.size() != q || s.rows() != q || s.cols() != q)
    throw DomainError("uncertain inference: input dimension mismatch");
}

// Cholesky of an SPD input-dependent matrix; on failure reports the
// condition number.
Eigen::LLT<MatrixXd> FactorOrReport(const MatrixXd& a, const char* what) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << what << " is singular or indefinite (eigenvalue range "
        << eig.eigenvalues().minCoeff() << " .. "
        << eig.eigenvalues().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  return llt;
}

// Per-output quantities shared by mean, covariance and their derivatives.
struct OutputTerms {
  VectorXd lam;  // squared length-scales
  MatrixXd ib;   // (S + Lambda)^{-1}
  MatrixXd t;    // nu * ib, n x q
  VectorXd qv;   // expected kernel values
  VectorXd wv;   // weights .* qv
  double mean;
};

}  // namespace

namespace {

// Exact (p, q) <-> (q, p) symmetry of every input-covariance Jacobian.
void SymmetrizeStage(StageMoments* st) {
  if (!st->has_derivatives) return;
  const int q = st->input_dim();
  SymmetrizeCovColumns(&st->dmean_ds, q);
  SymmetrizeCovColumns(&st->dcov_ds, q);
  SymmetrizeCovColumns(&st->dcoef_ds, q);
}

}  // namespace

StageMoments SeMomentMatch(const SeExpansion& ex, const VectorXd& m,
                           const MatrixXd& s, bool derivatives,
                           bool param_derivatives) {
  CheckInput(ex, m, s);
  if (param_derivatives && ex.has_variance())
    throw DomainError(
        "SeMomentMatch: parameter derivatives need a "
        "deterministic expansion");
  if (param_derivatives) derivatives = true;
  const int n = ex.num_centers(), q = ex.input_dim(), e = ex.output_dim();
  const MatrixXd nu = ex.centers.rowwise() - m.transpose();
  const MatrixXd iq = MatrixXd::Identity(q, q);

  StageMoments out;
  out.mean.resize(e);
  out.cov.resize(e, e);
  out.coef.resize(q, e);

  std::vector<OutputTerms> terms(e);
  for (int a = 0; a < e; ++a) {
    OutputTerms& tm = terms[a];
    tm.lam = (2.0 * ex.log_lengths.row(a).transpose()).array().exp();
    MatrixXd b = s;
    b.diagonal() += tm.lam;
    const Eigen::LLT<MatrixXd> llt = FactorOrReport(b, "S + Lambda");
    tm.ib = Symmetrized(llt.solve(iq));
    tm.t = nu * tm.ib;
    const double logc = std::log(ex.signal_var(a)) +
                        0.5 * tm.lam.array().log().sum() - 0.5 * LogDet(llt);
    tm.qv = (logc - 0.5 * (nu.array() * tm.t.array()).rowwise().sum())
                .exp()
                .matrix();
    tm.wv = ex.weights.col(a).cwiseProduct(tm.qv);
    tm.mean = tm.wv.sum();
    out.mean(a) = tm.mean;
    out.coef.col(a) = tm.t.transpose() * tm.wv;
  }

  const int np = param_derivatives ? SeParamCount(ex) : 0;
  const int off_l = n * q, off_b = n * q + e * q;
  if (derivatives) {
    out.has_derivatives = true;
    out.dmean_dm.resize(e, q);
    out.dmean_ds.resize(e, q * q);
    out.dcov_dm.resize(e * e, q);
    out.dcov_ds.resize(e * e, q * q);
    out.dcoef_dm.resize(q * e, q);
    out.dcoef_ds.resize(q * e, q * q);
    for (int a = 0; a < e; ++a) {
      const OutputTerms& tm = terms[a];
      const MatrixXd twt = tm.t.transpose() * tm.wv.asDiagonal() * tm.t;
      const VectorXd coef = out.coef.col(a);
      out.dmean_dm.row(a) = coef.transpose();
      out.dmean_ds.row(a) = Vec(0.5 * (twt - tm.mean * tm.ib)).transpose();
      const MatrixXd dcm = twt - tm.mean * tm.ib;
      for (int r = 0; r < q; ++r) out.dcoef_dm.row(Flat(r, a, e)) = dcm.row(r);
      for (int p = 0; p < q; ++p) {
        const VectorXd wp = tm.wv.cwiseProduct(tm.t.col(p));
        const MatrixXd third = tm.t.transpose() * wp.asDiagonal() * tm.t;
        for (int qq = 0; qq < q; ++qq) {
          for (int r = 0; r < q; ++r) {
            out.dcoef_ds(Flat(r, a, e), Flat(p, qq, q)) =
                -tm.ib(r, p) * coef(qq) +
                0.5 * (third(qq, r) - tm.ib(p, qq) * coef(r));
          }
        }
      }
    }
    SymmetrizeCovColumns(&out.dcoef_ds, q);
  }
  if (param_derivatives) {
    out.dmean_dp = MatrixXd::Zero(e, np);
    out.dcov_dp = MatrixXd::Zero(e * e, np);
    out.dcoef_dp = MatrixXd::Zero(q * e, np);
    for (int a = 0; a < e; ++a) {
      const OutputTerms& tm = terms[a];
      const VectorXd coef = out.coef.col(a);
      for (int i = 0; i < n; ++i) {
        out.dmean_dp.block(a, i * q, 1, q) = -tm.wv(i) * tm.t.row(i);
        out.dmean_dp(a, off_b + a * n + i) = tm.qv(i);
        for (int r = 0; r < q; ++r) {
          out.dcoef_dp(Flat(r, a, e), off_b + a * n + i) =
              tm.qv(i) * tm.t(i, r);
          for (int l = 0; l < q; ++l)
            out.dcoef_dp(Flat(r, a, e), i * q + l) =
                tm.wv(i) * (tm.ib(r, l) - tm.t(i, r) * tm.t(i, l));
        }
      }
      for (int l = 0; l < q; ++l) {
        // d log qv_i / d log l_l.
        const VectorXd dlq =
            (tm.lam(l) * (tm.t.col(l).array().square() - tm.ib(l, l)) + 1.0)
                .matrix();
        const VectorXd wd = tm.wv.cwiseProduct(dlq);
        out.dmean_dp(a, off_l + a * q + l) = wd.sum();
        const VectorXd tw = tm.t.transpose() * wd;
        for (int r = 0; r < q; ++r)
          out.dcoef_dp(Flat(r, a, e), off_l + a * q + l) =
              -2.0 * tm.lam(l) * tm.ib(r, l) * coef(l) + tw(r);
      }
    }
  }

  // Covariance via the expected products of kernel pairs.
  for (int a = 0; a < e; ++a) {
    for (int b = a; b < e; ++b) {
      const OutputTerms& ta = terms[a];
      const OutputTerms& tb = terms[b];
      const VectorXd inv_a = ta.lam.cwiseInverse();
      const VectorXd inv_b = tb.lam.cwiseInverse();
      const VectorXd lab = (inv_a + inv_b).cwiseInverse();
      MatrixXd c = s;
      c.diagonal() += lab;
      const Eigen::LLT<MatrixXd> llt = FactorOrReport(c, "S + Lambda_ab");
      const MatrixXd g = Symmetrized(llt.solve(iq));
      const double logdet_r = (inv_a + inv_b).array().log().sum() + LogDet(llt);
      const MatrixXd amat = Symmetrized(
          MatrixXd(lab.asDiagonal()) - lab.asDiagonal() * g * lab.asDiagonal());
      const MatrixXd pa = nu * inv_a.asDiagonal();
      const MatrixXd rb = nu * inv_b.asDiagonal();
      const MatrixXd ea = pa * amat;  // rows A p_i
      const MatrixXd fb = rb * amat;  // rows A r_j
      const VectorXd ui =
          (-0.5 * (nu.array() * pa.array()) + 0.5 * (ea.array() * pa.array()))
              .rowwise()
              .sum();
      const VectorXd vj =
          (-0.5 * (nu.array() * rb.array()) + 0.5 * (fb.array() * rb.array()))
              .rowwise()
              .sum();
      const double c0 = std::log(ex.signal_var(a)) +
                        std::log(ex.signal_var(b)) - 0.5 * logdet_r;
      MatrixXd qm = ea * rb.transpose();
      qm.colwise() += ui;
      qm.rowwise() += vj.transpose();
      qm = (qm.array() + c0).exp().matrix();

      const VectorXd& wa = ex.weights.col(a);
      const VectorXd& wb = ex.weights.col(b);
      const VectorXd qwb = qm * wb;
      double v = wa.dot(qwb) - ta.mean * tb.mean;
      const bool diag_var = (a == b) && ex.has_variance();
      if (diag_var) v += ex.signal_var(a) - ex.k_inv[a].cwiseProduct(qm).sum();
      if (a == b) v += ex.noise_var(a);
      out.cov(a, b) = v;
      out.cov(b, a) = v;
      if (!derivatives) continue;

      MatrixXd pw = qm.cwiseProduct(wa * wb.transpose());
      if (diag_var) pw -= qm.cwiseProduct(ex.k_inv[a]);
      const VectorXd da = (tb.lam.array() / (ta.lam + tb.lam).array()).matrix();
      const VectorXd db = (ta.lam.array() / (ta.lam + tb.lam).array()).matrix();
      const MatrixXd aa = nu * da.asDiagonal() * g;
      const MatrixXd bb = nu * db.asDiagonal() * g;
      const VectorXd rs = pw.rowwise().sum();
      const VectorXd cs = pw.colwise().sum().transpose();
      const double tot = rs.sum();
      const MatrixXd pbb = pw * bb;  // n x q
      const VectorXd gm = aa.transpose() * rs + bb.transpose() * cs;
      const MatrixXd atpb = aa.transpose() * pbb;
      const MatrixXd gs = 0.5 * (aa.transpose() * rs.asDiagonal() * aa +
                                 bb.transpose() * cs.asDiagonal() * bb + atpb +
                                 atpb.transpose() - tot * g);

      VectorXd dm = gm - tb.mean * out.dmean_dm.row(a).transpose() -
                    ta.mean * out.dmean_dm.row(b).transpose();
      VectorXd ds = Vec(gs) - tb.mean * out.dmean_ds.row(a).transpose() -
                    ta.mean * out.dmean_ds.row(b).transpose();
      out.dcov_dm.row(Flat(a, b, e)) = dm.transpose();
      out.dcov_dm.row(Flat(b, a, e)) = dm.transpose();
      out.dcov_ds.row(Flat(a, b, e)) = ds.transpose();
      out.dcov_ds.row(Flat(b, a, e)) = ds.transpose();
      if (!param_derivatives) continue;

      VectorXd dp = VectorXd::Zero(np);
      // Weights.
      dp.segment(off_b + a * n, n) += qwb;
      dp.segment(off_b + b * n, n) += qm.transpose() * wa;
      // Centers.
      const VectorXd sum_ab = ta.lam + tb.lam;
      const MatrixXd pc = pw * ex.centers;
      const MatrixXd ptc = pw.transpose() * ex.centers;
      const MatrixXd ptaa = pw.transpose() * aa;
      for (int i = 0; i < n; ++i) {
        const VectorXd ci = ex.centers.row(i).transpose();
        const VectorXd t1 =
            -((rs(i) * ci - pc.row(i).transpose()).array() / sum_ab.array())
                 .matrix() -
            da.cwiseProduct(rs(i) * aa.row(i).transpose() +
                            pbb.row(i).transpose());
        const VectorXd t2 =
            ((ptc.row(i).transpose() - cs(i) * ci).array() / sum_ab.array())
                .matrix() -
            db.cwiseProduct(ptaa.row(i).transpose() +
                            cs(i) * bb.row(i).transpose());
        dp.segment(i * q, q) += t1 + t2;
      }
      // Length-scales.
      const MatrixXd pf = pw * fb;               // n x q
      const MatrixXd pte = pw.transpose() * ea;  // n x q
      for (int l = 0; l < q; ++l) {
        const Eigen::ArrayXd nul = nu.col(l).array();
        const Eigen::ArrayXd el = ea.col(l).array(), fl = fb.col(l).array();
        const Eigen::ArrayXd rsa = rs.array(), csa = cs.array();
        const double sq = (rsa * el.square()).sum() + (csa * fl.square()).sum();
        const double sa = -0.5 * (rsa * nul.square()).sum() -
                          0.5 * tot * amat(l, l) + (rsa * el * nul).sum() +
                          (nul * pf.col(l).array()).sum() -
                          0.5 * (sq + 2.0 * (el * pf.col(l).array()).sum());
        const double sb =
            -0.5 * (csa * nul.square()).sum() - 0.5 * tot * amat(l, l) +
            (nul * pte.col(l).array()).sum() + (csa * fl * nul).sum() -
            0.5 * (sq + 2.0 * (fl * pte.col(l).array()).sum());
        dp(off_l + a * q + l) += -2.0 * inv_a(l) * sa;
        dp(off_l + b * q + l) += -2.0 * inv_b(l) * sb;
      }
      dp -= tb.mean * out.dmean_dp.row(a).transpose() +
            ta.mean * out.dmean_dp.row(b).transpose();
      out.dcov_dp.row(Flat(a, b, e)) = dp.transpose();
      out.dcov_dp.row(Flat(b, a, e)) = dp.transpose();
    }
  }
  SymmetrizeStage(&out);
  return out;
}

StageMoments SeLinearize(const SeExpansion& ex, const VectorXd& m,
                         const MatrixXd& s, bool derivatives) {
  CheckInput(ex, m, s);
  const int q = ex.input_dim(), e = ex.output_dim();
  const MatrixXd nu = ex.centers.rowwise() - m.transpose();

  StageMoments out;
  out.mean.resize(e);
  MatrixXd jac(e, q);  // d mean / d input
  VectorXd var_f = VectorXd::Zero(e);
  std::vector<MatrixXd> hess(e);
  MatrixXd dvar = MatrixXd::Zero(e, q);
  for (int a = 0; a < e; ++a) {
    const VectorXd inv_l =
        (-2.0 * ex.log_lengths.row(a).transpose()).array().exp();
    const MatrixXd pn = nu * inv_l.asDiagonal();
    const VectorXd kv =
        (ex.signal_var(a) *
         (-0.5 * (nu.array() * pn.array()).rowwise().sum()).exp())
            .matrix();
    const VectorXd wk = ex.weights.col(a).cwiseProduct(kv);
    out.mean(a) = wk.sum();
    jac.row(a) = (pn.transpose() * wk).transpose();
    if (derivatives) {
      hess[a] = pn.transpose() * wk.asDiagonal() * pn;
      hess[a].diagonal() -= wk.sum() * inv_l;
    }
    if (ex.has_variance()) {
      const VectorXd z = ex.k_inv[a] * kv;
      var_f(a) = std::max(ex.signal_var(a) - kv.dot(z), 0.0);
      if (derivatives)
        dvar.row(a) = (-2.0 * pn.transpose() * z.cwiseProduct(kv)).transpose();
    }
  }
  const MatrixXd sv = s * jac.transpose();  // q x E, column b = S V_b
  out.cov = Symmetrized(jac * sv);
  out.cov.diagonal() += ex.noise_var + var_f;
  out.coef = jac.transpose();
  if (!derivatives) return out;

  out.has_derivatives = true;
  out.dmean_dm = jac;
  out.dmean_ds = MatrixXd::Zero(e, q * q);
  out.dcov_dm.resize(e * e, q);
  out.dcov_ds.resize(e * e, q * q);
  for (int a = 0; a < e; ++a) {
    for (int b = 0; b < e; ++b) {
      VectorXd d =
          hess[a].transpose() * sv.col(b) + hess[b].transpose() * sv.col(a);
      if (a == b) d += dvar.row(a).transpose();
      out.dcov_dm.row(Flat(a, b, e)) = d.transpose();
      for (int p = 0; p < q; ++p)
        for (int r = 0; r < q; ++r)
          out.dcov_ds(Flat(a, b, e), Flat(p, r, q)) =
              0.5 * (jac(a, p) * jac(b, r) + jac(a, r) * jac(b, p));
    }
  }
  out.dcoef_dm.resize(q * e, q);
  for (int p = 0; p < q; ++p)
    for (int a = 0; a < e; ++a)
      out.dcoef_dm.row(Flat(p, a, e)) = hess[a].row(p);
  out.dcoef_ds = MatrixXd::Zero(q * e, q * q);
  SymmetrizeStage(&out);
  return out;
}

StageMoments PredictStage(const GpModel& model, InferenceMethod method,
                          const InferenceOptions& options, const VectorXd& m,
                          const MatrixXd& s, bool derivatives) {
  const SeExpansion ex =
      SeExpansion::FromModel(model, options.include_model_variance);
  return method == InferenceMethod::kMomentMatch
             ? SeMomentMatch(ex, m, s, derivatives)
             : SeLinearize(ex, m, s, derivatives);
}

namespace {

UncertainPrediction ToPrediction(const StageMoments& st, const MatrixXd& s) {
  UncertainPrediction p;
  p.delta_mean = st.mean;
  p.delta_cov = Symmetrized(st.cov);
  p.input_delta_cross_cov = s * st.coef;
  return p;
}

InferenceGradients ToGradients(const StageMoments& st, const MatrixXd& s) {
  const int q = st.input_dim(), e = st.output_dim();
  InferenceGradients g;
  g.d_mean_d_input_mean = st.dmean_dm;
  g.d_mean_d_input_cov = st.dmean_ds;
  g.d_cov_d_input_mean = st.dcov_dm;
  g.d_cov_d_input_cov = st.dcov_ds;
  g.d_crosscov_d_input_mean = MatrixXd::Zero(q * e, q);
  g.d_crosscov_d_input_cov = MatrixXd::Zero(q * e, q * q);
  for (int r = 0; r < q; ++r) {
    for (int a = 0; a < e; ++a) {
      const int row = Flat(r, a, e);
      for (int t = 0; t < q; ++t) {
        g.d_crosscov_d_input_mean.row(row) +=
            s(r, t) * st.dcoef_dm.row(Flat(t, a, e));
        g.d_crosscov_d_input_cov.row(row) +=
            s(r, t) * st.dcoef_ds.row(Flat(t, a, e));
      }
      for (int qq = 0; qq < q; ++qq)
        g.d_crosscov_d_input_cov(row, Flat(r, qq, q)) += st.coef(qq, a);
    }
  }
  SymmetrizeCovColumns(&g.d_crosscov_d_input_cov, q);
  return g;
}

}  // namespace

UncertainPrediction MomentMatch(const GpModel& model,
                                const GaussianBelief& input,
                                const InferenceOptions& options) {
  return ToPrediction(PredictStage(model, InferenceMethod::kMomentMatch,
                                   options, input.mean(), input.cov(), false),
                      input.cov());
}

UncertainPrediction LinearizePredict(const GpModel& model,
                                     const GaussianBelief& input,
                                     const InferenceOptions& options) {
  return ToPrediction(PredictStage(model, InferenceMethod::kLinearize, options,
                                   input.mean(), input.cov(), false),
                      input.cov());
}

InferenceGradients MomentMatchGradients(const GpModel& model,
                                        const GaussianBelief& input,
                                        const InferenceOptions& options) {
  return ToGradients(PredictStage(model, InferenceMethod::kMomentMatch, options,
                                  input.mean(), input.cov(), true),
                     input.cov());
}

InferenceGradients LinearizeGradients(const GpModel& model,
                                      const GaussianBelief& input,
                                      const InferenceOptions& options) {
  return ToGradients(PredictStage(model, InferenceMethod::kLinearize, options,
                                  input.mean(), input.cov(), true),
                     input.cov());
}

}  // namespace pilco
