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

#include "pilco/checks.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pilco/cost.h"
#include "pilco/gp.h"
#include "pilco/inference.h"
#include "pilco/policy.h"
#include "pilco/rollout.h"
#include "pilco/verification.h"

namespace pilco {

using verify::Rng;

double CheckReport::worst() const {
  double w = 0.0;
  for (const TrialResult& t : trials) w = std::max(w, t.worst);
  return w;
}

std::string CheckReport::Table() const {
  std::ostringstream out;
  out << "subject\ttrial\tworst\tlimit\tentry\n";
  char buf[64];
  for (const TrialResult& t : trials) {
    std::snprintf(buf, sizeof(buf), "%.4g\t%.4g", t.worst, limit);
    out << subject << "\t" << t.trial << "\t" << buf << "\t" << t.where << "\n";
  }
  return out.str();
}

std::string OracleSubjectName(OracleSubject s) {
  switch (s) {
    case OracleSubject::kMomentMatch:
      return "moment_match";
    case OracleSubject::kSquashMoments:
      return "squash_moments";
    case OracleSubject::kExpectedCost:
      return "expected_cost";
    case OracleSubject::kStep:
      return "step";
  }
  return "";
}

OracleSubject ParseOracleSubject(const std::string& name) {
  for (OracleSubject s :
       {OracleSubject::kMomentMatch, OracleSubject::kSquashMoments,
        OracleSubject::kExpectedCost, OracleSubject::kStep})
    if (OracleSubjectName(s) == name) return s;
  throw DomainError("unknown oracle subject: " + name);
}

std::string GradSubjectName(GradSubject s) {
  switch (s) {
    case GradSubject::kRollout:
      return "rollout";
    case GradSubject::kPolicy:
      return "policy";
    case GradSubject::kCost:
      return "cost";
    case GradSubject::kEvidence:
      return "evidence";
    case GradSubject::kInference:
      return "inference";
  }
  return "";
}

GradSubject ParseGradSubject(const std::string& name) {
  for (GradSubject s :
       {GradSubject::kRollout, GradSubject::kPolicy, GradSubject::kCost,
        GradSubject::kEvidence, GradSubject::kInference})
    if (GradSubjectName(s) == name) return s;
  throw DomainError("unknown gradient subject: " + name);
}

namespace {

// Records the largest |closed - mc| / se over a block.
void Compare(const MatrixXd& closed, const MatrixXd& mc, const MatrixXd& se,
             const char* name, TrialResult* r) {
  for (int i = 0; i < closed.rows(); ++i) {
    for (int j = 0; j < closed.cols(); ++j) {
      const double diff = std::abs(closed(i, j) - mc(i, j));
      const double z = se(i, j) > 0.0 ? diff / se(i, j)
                       : diff > 1e-12 ? std::numeric_limits<double>::infinity()
                                      : 0.0;
      if (!(z <= r->worst)) {
        r->worst = z;
        r->where = std::string(name) + "(" + std::to_string(i) + "," +
                   std::to_string(j) + ")";
      }
    }
  }
}

constexpr double kCorruption = 1.05;

TrialResult MomentMatchTrial(int trial, const OracleOptions& o, Rng* rng) {
  const int q = 1 + trial % 3, e = 1 + (trial / 3) % 2;
  const int n = std::min(50, 10 + 2 * trial);
  const GpModel model = verify::RandomModel(rng, q, e, n);
  const VectorXd m = verify::RandomVector(rng, q, -1.0, 1.0);
  const MatrixXd s = verify::RandomCov(rng, q, 0.05, 0.8);
  UncertainPrediction p = MomentMatch(model, GaussianBelief(m, s));
  if (o.corrupt) p.delta_cov *= kCorruption;
  const auto mc = verify::McPredict(model, m, s, o.samples, true, rng);
  TrialResult r{trial, 0.0, ""};
  Compare(p.delta_mean, mc.mean.tail(e), mc.mean_se.tail(e), "mean", &r);
  Compare(p.delta_cov, mc.cov.block(q, q, e, e), mc.cov_se.block(q, q, e, e),
          "cov", &r);
  Compare(p.input_delta_cross_cov, mc.cov.block(0, q, q, e),
          mc.cov_se.block(0, q, q, e), "cross_cov", &r);
  return r;
}

TrialResult SquashTrial(int trial, const OracleOptions& o, Rng* rng) {
  const int d = 1 + trial % 2, f = 1 + (trial / 2) % 2;
  const VectorXd mean = verify::RandomVector(rng, d + f, -1.0, 1.0);
  const MatrixXd cov = verify::RandomCov(rng, d + f, 0.05, 1.0);
  const VectorXd u_max = verify::RandomVector(rng, f, 1.0, 3.0);
  ControlMoments c = SquashMoments(mean.tail(f), cov.block(d, d, f, f),
                                   cov.block(0, d, d, f), u_max);
  if (o.corrupt) c.u_cov *= kCorruption;
  const verify::GaussianSampler sampler(mean, cov);
  verify::MomentSe acc(d + f, o.samples);
  for (long i = 0; i < o.samples; ++i) {
    VectorXd v = sampler.Draw(rng);
    for (int a = 0; a < f; ++a) v(d + a) = u_max(a) * Squash(v(d + a));
    acc.Add(v);
  }
  const auto mc = acc.Compute();
  TrialResult r{trial, 0.0, ""};
  Compare(c.u_mean, mc.mean.tail(f), mc.mean_se.tail(f), "mean", &r);
  Compare(c.u_cov, mc.cov.block(d, d, f, f), mc.cov_se.block(d, d, f, f), "cov",
          &r);
  Compare(c.state_control_cross_cov, mc.cov.block(0, d, d, f),
          mc.cov_se.block(0, d, d, f), "cross_cov", &r);
  return r;
}

TrialResult CostTrial(int trial, const OracleOptions& o, Rng* rng) {
  const int k = 1 + trial % 3;
  CostConfig cfg;
  cfg.target = verify::RandomVector(rng, k, -1.0, 1.0);
  cfg.precision = verify::RandomCov(rng, k, 0.3, 3.0);
  const VectorXd m = verify::RandomVector(rng, k, -1.0, 1.0);
  const MatrixXd s = verify::RandomCov(rng, k, 0.02, 1.0);
  const double mean = ExpectedCost(cfg, m, s).value;
  const double sd = CostStd(cfg, m, s).value;
  const double var = sd * sd * (o.corrupt ? kCorruption : 1.0);
  const verify::GaussianSampler sampler(m, s);
  verify::MomentSe acc(1, o.samples);
  for (long i = 0; i < o.samples; ++i)
    acc.Add(VectorXd::Constant(1, Cost(cfg, sampler.Draw(rng))));
  const auto mc = acc.Compute();
  TrialResult r{trial, 0.0, ""};
  Compare(MatrixXd::Constant(1, 1, mean), mc.mean, mc.mean_se, "mean", &r);
  Compare(MatrixXd::Constant(1, 1, var), mc.cov, mc.cov_se, "var", &r);
  return r;
}

TrialResult StepTrial(int trial, const OracleOptions& o, Rng* rng) {
  const int d = 2;
  const GpModel model = verify::RandomModel(rng, d + 1, d, 30);
  const VectorXd u_max = VectorXd::Constant(1, verify::Uniform(rng, 1.0, 3.0));
  Policy policy = Policy::Linear(d, 1, u_max);
  VectorXd theta = VectorXd::Zero(policy.num_params());
  theta(d) = verify::Uniform(rng, -1.5, 1.5);
  policy.SetParams(theta);

  RolloutSetup setup;
  setup.features = TrigFeatures(d, {});
  setup.model_uses_features = false;
  setup.cost_map.trig = setup.features;
  setup.cost_map.lin = MatrixXd::Identity(d, d);
  setup.cost_map.offset = VectorXd::Zero(d);
  setup.cost = CostConfig::Selector(VectorXd::Zero(d), VectorXd::Ones(d), 1.0);
  const RolloutEngine engine(model, setup);

  const VectorXd m = verify::RandomVector(rng, d, -1.0, 1.0);
  const MatrixXd s = verify::RandomCov(rng, d, 0.05, 0.5);
  const StepResult step = engine.Step(policy, GaussianBelief(m, s));
  MatrixXd next_cov = step.next.cov();
  if (o.corrupt) next_cov *= kCorruption;

  const verify::GaussianSampler sampler(m, s);
  verify::MomentSe acc(d, o.samples);
  const long batch = 2000;
  MatrixXd in(batch, d + 1);
  for (long done = 0; done < o.samples; done += batch) {
    const long nb = std::min(batch, o.samples - done);
    for (long i = 0; i < nb; ++i) {
      const VectorXd x = sampler.Draw(rng);
      in.row(i) << x.transpose(), policy.Control(x).transpose();
    }
    const MatrixXd delta =
        verify::SampleGpOutputs(model, in.topRows(nb), true, rng);
    for (long i = 0; i < nb; ++i)
      acc.Add((in.row(i).head(d) + delta.row(i)).transpose());
  }
  const auto mc = acc.Compute();
  TrialResult r{trial, 0.0, ""};
  Compare(step.next.mean(), mc.mean, mc.mean_se, "mean", &r);
  Compare(next_cov, mc.cov, mc.cov_se, "cov", &r);
  return r;
}

VectorXd Flatten(const UncertainPrediction& p) {
  VectorXd v(p.delta_mean.size() + p.delta_cov.size() +
             p.input_delta_cross_cov.size());
  v << p.delta_mean, Vec(p.delta_cov), Vec(p.input_delta_cross_cov);
  return v;
}

VectorXd Flatten(const ControlMoments& c) {
  VectorXd v(c.u_mean.size() + c.u_cov.size() +
             c.state_control_cross_cov.size());
  v << c.u_mean, Vec(c.u_cov), Vec(c.state_control_cross_cov);
  return v;
}

double RolloutTrial(int trial, const GradOptions& o, Rng* rng) {
  const verify::RandomSystem sys = verify::MakeRandomSystem(rng);
  const InferenceMethod method = trial % 2 == 0 ? InferenceMethod::kMomentMatch
                                                : InferenceMethod::kLinearize;
  const Policy p = (trial / 2) % 2 == 0 ? verify::RandomRbfPolicy(sys, 3, rng)
                                        : verify::RandomLinearPolicy(sys, rng);
  const RolloutEngine engine(sys.model, sys.Setup(method));
  const RolloutReport r = engine.Rollout(p, sys.initial, o.horizon, true);
  return verify::MaxRelErr(
      r.grad.transpose(),
      verify::FdRolloutGradient(engine, p, sys.initial, o.horizon));
}

double PolicyTrial(int trial, Rng* rng) {
  const int d = 1 + trial % 4, f = 1 + trial % 2;
  const VectorXd u_max = verify::RandomVector(rng, f, 1.0, 5.0);
  Policy p;
  if (trial % 3 == 2) {
    p = Policy::Linear(d, f, u_max);
    p.SetParams(verify::RandomVector(rng, p.num_params(), -1.0, 1.0));
  } else {
    const int n = 2 + trial % 9;
    p = Policy::Rbf(d, f, n, u_max);
    VectorXd theta(p.num_params());
    int k = 0;
    for (int i = 0; i < n * d; ++i)
      theta(k++) = verify::Uniform(rng, -1.5, 1.5);
    for (int i = 0; i < f * d; ++i)
      theta(k++) = verify::Uniform(rng, -0.3, 0.5);
    for (int i = 0; i < n * f; ++i) theta(k++) = verify::Normal(rng, 1)(0);
    p.SetParams(theta);
  }
  const GaussianBelief in(verify::RandomVector(rng, d, -0.5, 0.5),
                          verify::RandomCov(rng, d, 0.05, 0.5));
  const ControlMoments c = ComputeControlMoments(p, in, true);
  const MatrixXd fd_m = verify::FdJacobian(
      [&](const VectorXd& x) {
        return Flatten(
            ComputeControlMoments(p, GaussianBelief(x, in.cov()), false));
      },
      in.mean());
  const MatrixXd fd_s = verify::FdCovJacobian(
      [&](const MatrixXd& s) {
        return Flatten(
            ComputeControlMoments(p, GaussianBelief(in.mean(), s), false));
      },
      in.cov());
  const MatrixXd fd_p = verify::FdJacobian(
      [&](const VectorXd& th) {
        Policy q = p;
        q.SetParams(th);
        return Flatten(ComputeControlMoments(q, in, false));
      },
      p.params());
  MatrixXd an(fd_m.rows(), d + d * d + p.num_params());
  an << c.d_mean, c.d_cov, c.d_cross;
  MatrixXd fd(an.rows(), an.cols());
  fd << fd_m, fd_s, fd_p;
  return verify::MaxRelErr(an, fd);
}

double CostGradTrial(Rng* rng) {
  const int k = 2;
  const CostConfig cfg =
      CostConfig::Selector(verify::RandomVector(rng, k, -1.0, 1.0),
                           VectorXd::Ones(k), verify::Uniform(rng, 0.2, 1.0));
  const VectorXd m = verify::RandomVector(rng, k, -1.0, 1.0);
  const MatrixXd s = verify::RandomCov(rng, k, 0.02, 0.5);
  double worst = 0.0;
  for (bool std_dev : {false, true}) {
    auto eval = [&](const VectorXd& mm, const MatrixXd& ss) {
      return std_dev ? CostStd(cfg, mm, ss) : ExpectedCost(cfg, mm, ss);
    };
    const CostMoment c = eval(m, s);
    const MatrixXd fd_m = verify::FdJacobian(
        [&](const VectorXd& x) {
          return VectorXd::Constant(1, eval(x, s).value);
        },
        m);
    const MatrixXd fd_s = verify::FdCovJacobian(
        [&](const MatrixXd& ss) {
          return VectorXd::Constant(1, eval(m, ss).value);
        },
        s);
    worst = std::max(worst, verify::MaxRelErr(c.d_mean.transpose(), fd_m));
    worst = std::max(worst, verify::MaxRelErr(Vec(c.d_cov).transpose(), fd_s));
  }
  return worst;
}

double EvidenceTrial(int trial, Rng* rng) {
  const int q = 1 + trial % 3, n = 5 + 2 * trial;
  MatrixXd x(n, q);
  for (int i = 0; i < n; ++i) x.row(i) = verify::RandomVector(rng, q, -2, 2);
  VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y(i) = std::cos(x.row(i).sum()) + 0.05 * verify::Uniform(rng, -1, 1);
  GpHyperparams hp;
  hp.length_scales = verify::RandomVector(rng, q, 0.5, 2.0);
  hp.signal_var = verify::Uniform(rng, 0.3, 2.0);
  hp.noise_var = verify::Uniform(rng, 0.01, 0.2);
  const MatrixXd fd = verify::FdJacobian(
      [&](const VectorXd& p) {
        return VectorXd::Constant(
            1, LogEvidence(x, y, GpHyperparams::FromLog(p)).value);
      },
      hp.ToLog());
  return verify::MaxRelErr(LogEvidence(x, y, hp).gradient.transpose(), fd);
}

double InferenceTrial(int trial, Rng* rng) {
  const int q = 1 + trial % 3, e = 1 + trial % 2;
  const GpModel model = verify::RandomModel(rng, q, e, 15);
  const VectorXd m = verify::RandomVector(rng, q, -1.0, 1.0);
  const MatrixXd s = verify::RandomCov(rng, q, 0.05, 1.0);
  using PredictFn = UncertainPrediction (*)(
      const GpModel&, const GaussianBelief&, const InferenceOptions&);
  using GradFn = InferenceGradients (*)(const GpModel&, const GaussianBelief&,
                                        const InferenceOptions&);
  const std::pair<PredictFn, GradFn> methods[] = {
      {&MomentMatch, &MomentMatchGradients},
      {&LinearizePredict, &LinearizeGradients}};
  double worst = 0.0;
  for (const auto& [predict, grad] : methods) {
    const InferenceGradients g = grad(model, GaussianBelief(m, s), {});
    const MatrixXd fd_m = verify::FdJacobian(
        [&](const VectorXd& x) {
          return Flatten(predict(model, GaussianBelief(x, s), {}));
        },
        m);
    const MatrixXd fd_s = verify::FdCovJacobian(
        [&](const MatrixXd& c) {
          return Flatten(predict(model, GaussianBelief(m, c), {}));
        },
        s);
    MatrixXd an_m(fd_m.rows(), fd_m.cols()), an_s(fd_s.rows(), fd_s.cols());
    an_m << g.d_mean_d_input_mean, g.d_cov_d_input_mean,
        g.d_crosscov_d_input_mean;
    an_s << g.d_mean_d_input_cov, g.d_cov_d_input_cov, g.d_crosscov_d_input_cov;
    worst = std::max(
        {worst, verify::MaxRelErr(an_m, fd_m), verify::MaxRelErr(an_s, fd_s)});
  }
  return worst;
}

}  // namespace

CheckReport OracleCheck(OracleSubject subject, const OracleOptions& options) {
  if (options.samples < 100000)
    throw DomainError("oracle check needs at least 1e5 samples");
  if (options.trials < 1) throw DomainError("oracle check needs trials >= 1");
  CheckReport report;
  report.subject = OracleSubjectName(subject);
  report.limit = options.limit_se;
  Rng rng(options.seed);
  for (int t = 0; t < options.trials; ++t) {
    switch (subject) {
      case OracleSubject::kMomentMatch:
        report.trials.push_back(MomentMatchTrial(t, options, &rng));
        break;
      case OracleSubject::kSquashMoments:
        report.trials.push_back(SquashTrial(t, options, &rng));
        break;
      case OracleSubject::kExpectedCost:
        report.trials.push_back(CostTrial(t, options, &rng));
        break;
      case OracleSubject::kStep:
        report.trials.push_back(StepTrial(t, options, &rng));
        break;
    }
  }
  return report;
}

CheckReport GradCheck(GradSubject subject, const GradOptions& options) {
  if (options.trials < 1) throw DomainError("gradient check needs trials >= 1");
  CheckReport report;
  report.subject = GradSubjectName(subject);
  report.limit = subject == GradSubject::kRollout ? 1e-4 : 1e-5;
  Rng rng(options.seed);
  for (int t = 0; t < options.trials; ++t) {
    TrialResult r{t, 0.0, report.subject};
    switch (subject) {
      case GradSubject::kRollout:
        r.worst = RolloutTrial(t, options, &rng);
        break;
      case GradSubject::kPolicy:
        r.worst = PolicyTrial(t, &rng);
        break;
      case GradSubject::kCost:
        r.worst = CostGradTrial(&rng);
        break;
      case GradSubject::kEvidence:
        r.worst = EvidenceTrial(t, &rng);
        break;
      case GradSubject::kInference:
        r.worst = InferenceTrial(t, &rng);
        break;
    }
    report.trials.push_back(r);
  }
  return report;
}

}  // namespace pilco
