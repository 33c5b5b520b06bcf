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

#include "pilco/optimizer.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace pilco {

void ValidateSettings(const OptimSettings& s) {
  if (!(0.0 < s.sufficient_decrease && s.sufficient_decrease < s.curvature &&
        s.curvature < 1.0))
    throw DomainError("optimizer: need 0 < c1 < c2 < 1");
  if (s.max_iters < 0 || s.history < 1 || s.max_line_search < 1)
    throw DomainError("optimizer: invalid iteration counts");
  if (!(s.grad_tol >= 0.0)) throw DomainError("optimizer: negative grad_tol");
}

std::string StatusName(OptimStatus status) {
  switch (status) {
    case OptimStatus::kConverged:
      return "converged";
    case OptimStatus::kMaxIters:
      return "max_iters";
    case OptimStatus::kLineSearchFailed:
      return "line_search_failed";
    case OptimStatus::kNonFinite:
      return "non_finite";
  }
  return "unknown";
}

namespace {

struct Point {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
  VectorXd grad;
  bool finite = false;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const VectorXd& x, const VectorXd& dir,
             double f0, double slope0, const OptimSettings& s, int* evals)
      : f_(f),
        x_(x),
        dir_(dir),
        f0_(f0),
        slope0_(slope0),
        s_(s),
        evals_(evals) {}

  // Returns true and the accepted point on success.
  bool Run(double alpha0, Point* accepted) {
    Point prev;
    prev.alpha = 0.0;
    prev.value = f0_;
    prev.slope = slope0_;
    prev.finite = true;
    double alpha = alpha0;
    for (int i = 0; used_ < s_.max_line_search; ++i) {
      Point cur = Eval(alpha);
      if (!cur.finite || !Armijo(cur) || (i > 0 && cur.value >= prev.value))
        return Zoom(prev, cur, accepted);
      if (std::abs(cur.slope) <= -s_.curvature * slope0_) {
        *accepted = cur;
        return true;
      }
      if (cur.slope >= 0.0) return Zoom(cur, prev, accepted);
      prev = cur;
      alpha = std::min(2.0 * alpha, 1e10);
    }
    return Fallback(prev, accepted);
  }

 private:
  Point Eval(double alpha) {
    ++used_;
    ++*evals_;
    Point p;
    p.alpha = alpha;
    p.grad.resize(x_.size());
    try {
      p.value = f_(x_ + alpha * dir_, &p.grad);
      p.finite = std::isfinite(p.value) && p.grad.allFinite();
    } catch (const NumericalError&) {
      p.finite = false;
    }
    if (p.finite) p.slope = p.grad.dot(dir_);
    return p;
  }

  bool Armijo(const Point& p) const {
    return p.value <= f0_ + s_.sufficient_decrease * p.alpha * slope0_;
  }

  // lo satisfies sufficient decrease and has the lowest value seen; hi
  // brackets a step satisfying the strong Wolfe conditions.
  bool Zoom(Point lo, Point hi, Point* accepted) {
    while (used_ < s_.max_line_search) {
      const double a = lo.alpha, b = hi.alpha;
      double alpha = 0.5 * (a + b);
      if (hi.finite) {
        // Minimizer of the quadratic through (lo.value, lo.slope, hi.value).
        const double d = b - a;
        const double denom = 2.0 * (hi.value - lo.value - lo.slope * d);
        if (denom > 0.0) alpha = a - lo.slope * d * d / denom;
      }
      const double lo_b = std::min(a, b), hi_b = std::max(a, b);
      const double margin = 0.1 * (hi_b - lo_b);
      alpha = std::clamp(alpha, lo_b + margin, hi_b - margin);
      if (hi_b - lo_b <= 1e-16 * std::max(1.0, hi_b)) break;

      Point cur = Eval(alpha);
      if (!cur.finite || !Armijo(cur) || cur.value >= lo.value) {
        hi = cur;
        continue;
      }
      if (std::abs(cur.slope) <= -s_.curvature * slope0_) {
        *accepted = cur;
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = cur;
    }
    return Fallback(lo, accepted);
  }

  // Out of evaluations: keep a point with sufficient decrease if there is
  // one.
  bool Fallback(const Point& best, Point* accepted) {
    if (best.alpha > 0.0 && best.finite && Armijo(best) && best.value < f0_) {
      *accepted = best;
      return true;
    }
    return false;
  }

  const Objective& f_;
  const VectorXd& x_;
  const VectorXd& dir_;
  double f0_, slope0_;
  const OptimSettings& s_;
  int* evals_;
  int used_ = 0;
};

}  // namespace

OptimResult Minimize(const Objective& objective, const VectorXd& x0,
                     const OptimSettings& settings) {
  ValidateSettings(settings);
  OptimResult res;
  res.x = x0;
  res.grad = VectorXd::Zero(x0.size());
  res.value = std::numeric_limits<double>::quiet_NaN();
  bool finite = false;
  try {
    res.value = objective(res.x, &res.grad);
    finite = std::isfinite(res.value) && res.grad.allFinite();
  } catch (const NumericalError&) {
  }
  res.evaluations = 1;
  if (!finite) {
    res.status = OptimStatus::kNonFinite;
    return res;
  }
  res.trace.push_back({0, res.value, res.grad.lpNorm<Eigen::Infinity>(), 0.0});

  std::deque<VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  res.status = OptimStatus::kMaxIters;
  for (int iter = 1;; ++iter) {
    if (res.grad.lpNorm<Eigen::Infinity>() <= settings.grad_tol) {
      res.status = OptimStatus::kConverged;
      break;
    }
    if (iter > settings.max_iters) break;

    // Two-loop recursion.
    VectorXd q = res.grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0)
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    VectorXd dir = -q;
    double slope = res.grad.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -res.grad;
      slope = res.grad.dot(dir);
    }
    double alpha0 = 1.0;
    if (s_hist.empty()) alpha0 = std::min(1.0, 1.0 / res.grad.norm());

    LineSearch ls(objective, res.x, dir, res.value, slope, settings,
                  &res.evaluations);
    Point acc;
    bool ok = ls.Run(alpha0, &acc);
    if (!ok && !s_hist.empty()) {
      // Retry once along steepest descent with fresh memory.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -res.grad;
      slope = res.grad.dot(dir);
      LineSearch retry(objective, res.x, dir, res.value, slope, settings,
                       &res.evaluations);
      ok = retry.Run(std::min(1.0, 1.0 / res.grad.norm()), &acc);
    }
    if (!ok) {
      res.status = OptimStatus::kLineSearchFailed;
      break;
    }
    {
      const VectorXd step = acc.alpha * dir;
      const VectorXd y = acc.grad - res.grad;
      const double sy = step.dot(y);
      res.x += step;
      res.value = acc.value;
      res.grad = acc.grad;
      res.iterations = iter;
      if (sy > 1e-12 * step.norm() * y.norm()) {
        s_hist.push_back(step);
        y_hist.push_back(y);
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > settings.history) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
      res.trace.push_back(
          {iter, res.value, res.grad.lpNorm<Eigen::Infinity>(), acc.alpha});
    }
  }
  return res;
}

}  // namespace pilco
