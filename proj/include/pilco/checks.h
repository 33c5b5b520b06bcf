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

// Verification suites run by the CLI and the acceptance binary: closed-form
// moments against Monte Carlo, and analytic gradients against finite
// differences, on seeded random problems.

#ifndef PILCO_CHECKS_H_
#define PILCO_CHECKS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace pilco {

struct TrialResult {
  int trial = 0;
  // Worst standard-error multiple (oracle checks) or relative error
  // (gradient checks).
  double worst = 0.0;
  std::string where;
};

struct CheckReport {
  std::string subject;
  double limit = 0.0;
  std::vector<TrialResult> trials;

  double worst() const;
  bool passed() const { return worst() <= limit; }
  // One tab-separated row per trial after a header.
  std::string Table() const;
};

enum class OracleSubject { kMomentMatch, kSquashMoments, kExpectedCost, kStep };

std::string OracleSubjectName(OracleSubject s);
OracleSubject ParseOracleSubject(const std::string& name);

struct OracleOptions {
  int trials = 20;
  long samples = 1000000;
  std::uint64_t seed = 0;
  double limit_se = 4.0;
  // Perturbs the closed-form covariance by 5% so the check must fail;
  // a sensitivity test of the harness itself.
  bool corrupt = false;
};

// Compares closed-form moments with Monte Carlo estimates on random
// problems:
//   moment_match   GP prediction at a Gaussian input (q <= 3, n <= 50,
//                  E <= 2): mean, covariance, input-output covariance.
//   squash_moments squashed control from a joint Gaussian (x, z).
//   expected_cost  mean and variance of the saturating cost.
//   step           one closed-loop step on a raw-state model with a
//                  constant control, where the step moments are exact.
// Throws DomainError if samples < 1e5 or trials < 1.
CheckReport OracleCheck(OracleSubject subject, const OracleOptions& options);

enum class GradSubject { kRollout, kPolicy, kCost, kEvidence, kInference };

std::string GradSubjectName(GradSubject s);
GradSubject ParseGradSubject(const std::string& name);

struct GradOptions {
  int trials = 6;
  std::uint64_t seed = 0;
  int horizon = 10;  // rollout subject
};

// Analytic gradients against Ridders finite differences. Limits: 1e-4 for
// the full rollout, 1e-5 elementwise otherwise.
CheckReport GradCheck(GradSubject subject, const GradOptions& options);

}  // namespace pilco

#endif  // PILCO_CHECKS_H_
