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

// Small dense linear-algebra helpers and the error types shared by every
// module.
//
// Flattening convention used by all Jacobians in this library: an R x C
// matrix entry (r, c) maps to index r * C + c (row-major). Derivatives with
// respect to a covariance matrix S are "symmetric gradients": the matrix G
// with df = sum_pq G_pq dS_pq for every symmetric perturbation dS. A finite
// difference harness therefore perturbs S_pq and S_qp together and halves
// the off-diagonal quotient.

#ifndef PILCO_LINALG_H_
#define PILCO_LINALG_H_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace pilco {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Invalid argument values: negative variances, non-PSD covariances,
// dimension mismatches.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Numerical breakdown: Cholesky failure after jitter, non-finite values.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline int Flat(int r, int c, int cols) { return r * cols + c; }

inline MatrixXd Symmetrized(const MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Row-major vectorization of a matrix.
inline VectorXd Vec(const MatrixXd& m) {
  VectorXd v(m.size());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) v(Flat(r, c, m.cols())) = m(r, c);
  return v;
}

inline MatrixXd Unvec(const VectorXd& v, int rows, int cols) {
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = v(Flat(r, c, cols));
  return m;
}

// Replaces every row of `grads` (each a flattened k x k gradient) by its
// symmetric part.
inline void SymmetrizeCovColumns(MatrixXd* grads, int k) {
  for (int row = 0; row < grads->rows(); ++row) {
    for (int p = 0; p < k; ++p) {
      for (int q = p + 1; q < k; ++q) {
        double avg =
            0.5 * ((*grads)(row, Flat(p, q, k)) + (*grads)(row, Flat(q, p, k)));
        (*grads)(row, Flat(p, q, k)) = avg;
        (*grads)(row, Flat(q, p, k)) = avg;
      }
    }
  }
}

// Seed Jacobian d vec(S) / d(symmetric gradient columns) for a k x k
// covariance: column (p, q) moves S_pq and S_qp by one half each.
inline MatrixXd CovSeed(int k) {
  MatrixXd seed = MatrixXd::Zero(k * k, k * k);
  for (int p = 0; p < k; ++p) {
    for (int q = 0; q < k; ++q) {
      seed(Flat(p, q, k), Flat(p, q, k)) += 0.5;
      seed(Flat(q, p, k), Flat(p, q, k)) += 0.5;
    }
  }
  return seed;
}

// Gathers the rows of a flattened-covariance Jacobian (n*n rows) belonging
// to the sub-block idx x idx.
inline MatrixXd GatherCovRows(const MatrixXd& dcov, int n,
                              const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  MatrixXd out(k * k, dcov.cols());
  for (int p = 0; p < k; ++p)
    for (int q = 0; q < k; ++q)
      out.row(Flat(p, q, k)) = dcov.row(Flat(idx[p], idx[q], n));
  return out;
}

inline MatrixXd GatherRows(const MatrixXd& m, const std::vector<int>& idx) {
  MatrixXd out(idx.size(), m.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(i) = m.row(idx[i]);
  return out;
}

inline VectorXd Gather(const VectorXd& v, const std::vector<int>& idx) {
  VectorXd out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

inline MatrixXd Gather(const MatrixXd& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  MatrixXd out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

// Log-determinant of an SPD matrix from its Cholesky factor.
inline double LogDet(const Eigen::LLT<MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Cholesky of an SPD matrix; throws NumericalError with `context` on failure.
inline Eigen::LLT<MatrixXd> CholeskyOrThrow(const MatrixXd& a,
                                            const std::string& context) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Cholesky failed: " + context);
  return llt;
}

// Cholesky with diagonal jitter escalation: 1e-10 * trace / n, multiplied
// by 10 up to 1e-4 * trace / n. `jitter` receives the amount added (0 when
// the plain factorization succeeded).
inline bool CholeskyWithJitter(const MatrixXd& a, Eigen::LLT<MatrixXd>* llt,
                               double* jitter = nullptr) {
  llt->compute(a);
  if (llt->info() == Eigen::Success) {
    if (jitter) *jitter = 0.0;
    return true;
  }
  const int n = static_cast<int>(a.rows());
  const double scale = std::max(a.trace() / std::max(n, 1), 1e-300);
  for (double j = 1e-10; j <= 1e-4 * (1 + 1e-9); j *= 10.0) {
    MatrixXd b = a;
    b.diagonal().array() += j * scale;
    llt->compute(b);
    if (llt->info() == Eigen::Success) {
      if (jitter) *jitter = j * scale;
      return true;
    }
  }
  return false;
}

}  // namespace pilco

#endif  // PILCO_LINALG_H_
