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

#ifndef JOPEQ_STATTESTS_HPP_
#define JOPEQ_STATTESTS_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

#include "jopeq/execution.hpp"

namespace jopeq {

inline constexpr double kKsCritical01 = 1.628;
inline constexpr double kCorrelationCritical01 = 2.58;

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double critical_value = 0.0;
  std::size_t sample_size = 0;
  bool pass = false;

  std::map<std::string, std::string> to_record() const;
  std::string to_text() const;
};

// sup_x |F_n(x) - F(x)|.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);

// One-sample KS at level 0.01, critical value 1.628/sqrt(n). Needs n >= 1000.
TestReport ks_test(std::span<const double> samples,
                   const std::function<double(double)>& cdf);

// |Pearson r| against 2.58/sqrt(n). Detects linear dependence only.
TestReport correlation_test(std::span<const double> x, std::span<const double> y);

// V-statistic nm/(n+m) (2 E|a-b| - E|a-a'| - E|b-b'|); rows are points.
double energy_statistic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct EnergyOptions {
  int permutations = 200;
  std::uint64_t seed = 0;
  Execution exec = Execution::kParallel;
};

// Two-sample energy test; the critical value is the 0.99 quantile of the
// permutation distribution. Memory is (n+m)^2 * 2 bytes.
TestReport energy_distance_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                const EnergyOptions& options = {});

double laplace_cdf(double x, double scale);
double uniform_cdf(double x, double lo, double hi);

}  // namespace jopeq

#endif  // JOPEQ_STATTESTS_HPP_
