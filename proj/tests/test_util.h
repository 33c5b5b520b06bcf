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

// Shared oracles for the test binaries: the library oracles plus
// Gauss-Hermite quadrature.

#ifndef PILCO_TESTS_TEST_UTIL_H_
#define PILCO_TESTS_TEST_UTIL_H_

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "pilco/verification.h"

namespace pilco::testing {

using namespace pilco::verify;  // NOLINT(build/namespaces)

// Physicists' Gauss-Hermite rule via Golub-Welsch.
struct HermiteRule {
  VectorXd nodes;
  VectorXd weights;
};

inline HermiteRule GaussHermite(int n) {
  MatrixXd j = MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(i / 2.0);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(j);
  HermiteRule r;
  r.nodes = es.eigenvalues();
  r.weights = std::sqrt(M_PI) * es.eigenvectors().row(0).array().square();
  return r;
}

// E[f(x)] for x ~ N(mu, var) by Gauss-Hermite quadrature.
inline double GaussExpect(const HermiteRule& r, double mu, double var,
                          const std::function<double(double)>& f) {
  double acc = 0.0;
  const double s = std::sqrt(2.0 * var);
  for (int i = 0; i < r.nodes.size(); ++i)
    acc += r.weights(i) * f(mu + s * r.nodes(i));
  return acc / std::sqrt(M_PI);
}

}  // namespace pilco::testing

#endif  // PILCO_TESTS_TEST_UTIL_H_
