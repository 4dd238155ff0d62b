// Copyright 2026 The JoPEQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef JOPEQ_VERIFY_HPP_
#define JOPEQ_VERIFY_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "jopeq/execution.hpp"
#include "jopeq/stattests.hpp"
#include "jopeq/sweep.hpp"

namespace jopeq {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::vector<TestReport> reports;
  std::vector<std::string> notes;
  double seconds = 0.0;

  std::string to_text() const;
};

// SDQ with a unit-step scalar lattice on Gaussian, uniform and constant
// inputs: distortion vs Uniform(-1/2, 1/2) by KS, |corr(input, distortion)|
// below 0.01, no overloads.
CheckResult check_sdq_law(std::uint64_t seed, std::size_t n = 100000);

// End-to-end scalar JoPEQ (R = 4, eps = 1, gamma = 2R + 1/eps): scaled
// per-coordinate distortion vs Lap(0, 2/eps) by KS, and overload count.
CheckResult check_laplace_law(std::uint64_t seed, std::size_t n = 100000);

// End-to-end hexagonal JoPEQ with the t mechanism (nu = 3, eps = 3): whitened
// distortion vs direct t draws by the energy test.
CheckResult check_t_law(std::uint64_t seed, std::size_t n = 10000, int rate_bits = 5,
                        Execution exec = Execution::kParallel);

// Scalar privacy-quantization threshold gamma*eps/2^R = sqrt 24.
CheckResult check_threshold();

// Mean ||w_tilde - w||^2 over independent runs against the distortion bound
// at every round (linear task, K = 10, tau = 4, eta = 0.05).
CheckResult check_distortion_bound(std::uint64_t seed, int runs = 20, int rounds = 200);

// Mean loss gap against the convergence bound under the decaying schedule,
// and the log-log slope over the final decade of iterations.
CheckResult check_convergence_bound(std::uint64_t seed, int runs = 10, int rounds = 10000);

// SNR-versus-rate shape for the scalar lattice, R = 1..8, eps in
// {3, 3.5, 4}, on a shared set of plain-trajectory updates.
CheckResult check_snr_shape(std::uint64_t seed, int snr_rounds = 1000);

// Logistic FL at R = 1, eps = 4: JoPEQ final loss gap against the SDQ-only,
// PPN-only and separate baselines, averaged over runs.
CheckResult check_learning_order(std::uint64_t seed, int runs = 10, int rounds = 300);

// Sweep and experiment reruns with equal seeds give identical bytes, for
// the parallel and serial paths.
CheckResult check_determinism(std::uint64_t seed);

// Runs `check(seed)`; on failure reruns once with a second fixed seed.
CheckResult with_retry(const std::function<CheckResult(std::uint64_t)>& check,
                       std::uint64_t seed);

struct VerifyOptions {
  std::uint64_t seed = 20260101;
  Execution exec = Execution::kParallel;
};

// The full invariant suite. Progress lines go to `log` when non-null.
std::vector<CheckResult> run_verify_suite(const VerifyOptions& options, std::ostream* log);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace jopeq

#endif  // JOPEQ_VERIFY_HPP_
