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

// Limited-memory BFGS with a strong-Wolfe line search.

#ifndef PILCO_OPTIMIZER_H_
#define PILCO_OPTIMIZER_H_

#include <functional>
#include <string>
#include <vector>

#include "pilco/linalg.h"

namespace pilco {

struct OptimSettings {
  int max_iters = 150;
  // Termination threshold on the infinity norm of the gradient.
  double grad_tol = 1e-6;
  double sufficient_decrease = 1e-4;
  double curvature = 0.9;
  int history = 10;
  // Objective evaluations allowed per line search.
  int max_line_search = 30;
};

// Throws DomainError unless 0 < sufficient_decrease < curvature < 1 and
// the counts are positive.
void ValidateSettings(const OptimSettings& settings);

enum class OptimStatus { kConverged, kMaxIters, kLineSearchFailed, kNonFinite };

std::string StatusName(OptimStatus status);

struct TraceEntry {
  int iter;
  double value;
  double grad_norm;  // infinity norm
  double step;       // accepted step length (0 for the initial point)
};

struct OptimResult {
  VectorXd x;
  double value;
  VectorXd grad;
  OptimStatus status;
  int iterations = 0;
  int evaluations = 0;
  std::vector<TraceEntry> trace;
};

// Returns f(x) and writes the gradient into *grad. May throw NumericalError
// for points where the objective is undefined; such points are treated like
// non-finite values.
using Objective = std::function<double(const VectorXd& x, VectorXd* grad)>;

// Minimizes from x0. The objective must be finite at x0 (otherwise status
// kNonFinite and x0 is returned). Accepted iterates never increase the value.
OptimResult Minimize(const Objective& objective, const VectorXd& x0,
                     const OptimSettings& settings);

}  // namespace pilco

#endif  // PILCO_OPTIMIZER_H_
