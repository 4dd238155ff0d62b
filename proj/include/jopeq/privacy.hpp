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

#ifndef JOPEQ_PRIVACY_HPP_
#define JOPEQ_PRIVACY_HPP_

#include <Eigen/Core>
#include <map>
#include <string>

#include "jopeq/lattice.hpp"
#include "jopeq/random.hpp"

namespace jopeq {

enum class MechanismKind { kLaplace, kMultivariateT };

// Exponent applied to the likelihood ratio in the t-mechanism budget.
// kAsPrinted uses (nu + d)^2; kHalf uses (nu + d) / 2.
enum class TExponent { kAsPrinted, kHalf };

inline constexpr TExponent kDefaultTExponent = TExponent::kAsPrinted;

// Sensitivity of sub-vectors scaled into the unit ball.
inline const double kUnitBallSensitivity = 1.4142135623730951;

std::string to_string(MechanismKind kind);
MechanismKind mechanism_kind_from_string(const std::string& name);

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kLaplace;
  double epsilon = 1.0;
  int dimension = 1;
  // Multivariate t only: degrees of freedom, Sigma = scale_sq * I.
  double nu = 3.0;
  double scale_sq = 1.0;
  double sensitivity = kUnitBallSensitivity;
  TExponent exponent = kDefaultTExponent;

  static MechanismSpec laplace(double epsilon, int dimension);
  // Solves for scale_sq given epsilon and nu.
  static MechanismSpec multivariate_t(double epsilon, int dimension, double nu,
                                      TExponent exponent = kDefaultTExponent,
                                      double sensitivity = kUnitBallSensitivity);

  // Laplace scale 2/epsilon.
  double laplace_scale() const { return 2.0 / epsilon; }
  // Total variance over all coordinates.
  double variance() const;
  double per_coordinate_variance() const { return variance() / dimension; }

  void validate() const;
  std::map<std::string, std::string> to_record() const;
  static MechanismSpec from_record(const std::map<std::string, std::string>& kv);
};

// Budget of the multivariate t mechanism for a whitened sensitivity.
double t_mech_epsilon(double nu, double whitened_delta, int d,
                      TExponent exponent = kDefaultTExponent);

// Worst-case whitened sensitivity max ||Sigma^{-1/2} v|| over ||v|| <= delta.
double whitened_sensitivity(const Eigen::MatrixXd& sigma, double delta);

// Scale s^2 with t_mech_epsilon(nu, delta / s, d) = epsilon. Throws
// InfeasibleParameters when no root lies in s in [1e-6, 1e6].
double solve_t_params(double epsilon, int d, double delta, double nu,
                      TExponent exponent = kDefaultTExponent);

double laplace_epsilon_for_budget(double sensitivity, double b);

// Characteristic function of the target mechanism noise.
double laplace_cf(const LatticeVector& t, double epsilon, int dimension);
double t_cf(const LatticeVector& t, const MechanismSpec& spec);
double mechanism_cf(const LatticeVector& t, const MechanismSpec& spec);

// Target CF divided by the cell CF.
double laplace_ppn_cf(const LatticeVector& t, double epsilon, const Lattice& lattice);
double t_ppn_cf(const LatticeVector& t, const MechanismSpec& spec, const Lattice& lattice);

// True iff gamma*epsilon/2^R >= sqrt(24).
bool pq_tradeoff_check(double gamma, double epsilon, int rate_bits);

// Per-coordinate PPN variance needed for the Laplace mechanism on a scalar
// lattice of step delta_q: 2(2/eps)^2 - delta_q^2/12.
double laplace_required_ppn_variance(double epsilon, double delta_q);

// Direct draw from the target mechanism (reference route, no lattice).
LatticeVector sample_mechanism(const MechanismSpec& spec, CounterStream& stream);

}  // namespace jopeq

#endif  // JOPEQ_PRIVACY_HPP_
