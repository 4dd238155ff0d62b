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

#include "jopeq/privacy.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "jopeq/errors.hpp"
#include "jopeq/stattests.hpp"

namespace jopeq {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

// Budget of the t mechanism evaluated directly in 50-digit arithmetic.
Big t_budget_oracle(Big nu, Big delta, int d, bool squared_exponent) {
  const Big c = (delta + boost::multiprecision::sqrt(delta * delta + 4 * nu)) / 2;
  const Big ratio = (1 + c * c / nu) / (1 + (c - delta) * (c - delta) / nu);
  const Big ex = squared_exponent ? (nu + d) * (nu + d) : (nu + d) / 2;
  return ex * boost::multiprecision::log(ratio);
}

TEST(TBudget, MatchesMultiprecisionOracle) {
  for (double nu : {2.5, 3.0, 5.0, 12.0}) {
    for (double delta : {1e-4, 0.01, 0.3, 1.0, 4.0}) {
      for (int d : {1, 2}) {
        const double want = static_cast<double>(t_budget_oracle(nu, delta, d, true));
        EXPECT_NEAR(t_mech_epsilon(nu, delta, d, TExponent::kAsPrinted), want, 1e-12 * want);
        const double half = static_cast<double>(t_budget_oracle(nu, delta, d, false));
        EXPECT_NEAR(t_mech_epsilon(nu, delta, d, TExponent::kHalf), half, 1e-12 * half);
      }
    }
  }
}

TEST(TBudget, FrozenValues) {
  // From the 50-digit oracle above.
  EXPECT_NEAR(t_mech_epsilon(3.0, std::sqrt(2.0), 2), 19.884136530597640763, 1e-12);
  EXPECT_NEAR(t_mech_epsilon(3.0, 0.5, 2), 7.1920518112945231860, 1e-12);
  EXPECT_NEAR(t_mech_epsilon(5.0, 0.1, 1), 1.6098348098991351446, 1e-12);
}

TEST(SolveT, RecoversScale) {
  // s^2 for nu = 3, d = 2, Delta = sqrt 2, eps = 3 (squared exponent).
  const double s2 = solve_t_params(3.0, 2, std::sqrt(2.0), 3.0, TExponent::kAsPrinted);
  EXPECT_NEAR(s2, 46.240780717895112500, 1e-9 * 46.24);
  const double h2 = solve_t_params(2.0, 2, std::sqrt(2.0), 3.0, TExponent::kHalf);
  EXPECT_NEAR(h2, 0.98784472972812425838, 1e-9);
  for (double eps : {0.5, 1.0, 4.0, 10.0}) {
    const double s = std::sqrt(solve_t_params(eps, 2, std::sqrt(2.0), 4.0));
    EXPECT_NEAR(t_mech_epsilon(4.0, std::sqrt(2.0) / s, 2), eps, 1e-9 * eps);
  }
}

TEST(SolveT, InfeasibleBudgetsRaise) {
  EXPECT_THROW(solve_t_params(1e-9, 2, std::sqrt(2.0), 3.0), InfeasibleParameters);
  EXPECT_THROW(solve_t_params(1e5, 2, std::sqrt(2.0), 3.0), InfeasibleParameters);
  EXPECT_THROW(solve_t_params(-1.0, 2, std::sqrt(2.0), 3.0), ConfigError);
}

TEST(WhitenedSensitivity, UsesSmallestEigenvalue) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 4, 0, 0, 1;
  EXPECT_NEAR(whitened_sensitivity(sigma, 2.0), 2.0, 1e-14);
  sigma << 9, 0, 0, 9;
  EXPECT_NEAR(whitened_sensitivity(sigma, 1.5), 0.5, 1e-14);
  sigma << 1, 1, 1, 1;
  EXPECT_THROW(whitened_sensitivity(sigma, 1.0), ConfigError);
}

TEST(Laplace, SpecMoments) {
  const auto s = MechanismSpec::laplace(4.0, 2);
  EXPECT_DOUBLE_EQ(s.laplace_scale(), 0.5);
  EXPECT_DOUBLE_EQ(s.variance(), 2 * 0.25 * 2);
  EXPECT_DOUBLE_EQ(s.per_coordinate_variance(), 0.5);
  EXPECT_THROW(MechanismSpec::laplace(0.0, 1), ConfigError);
}

TEST(Laplace, CharacteristicFunction) {
  const double b = 2.0 / 3.0;
  for (double t : {0.0, 0.5, 2.0, 10.0}) {
    EXPECT_NEAR(laplace_cf({t, 0.0}, 3.0, 1), 1.0 / (1 + b * b * t * t), 1e-15);
    EXPECT_NEAR(laplace_cf({t, -t}, 3.0, 2), 1.0 / ((1 + b * b * t * t) * (1 + b * b * t * t)), 1e-15);
  }
}

TEST(TMechanism, CfMatchesNuThreeClosedForm) {
  // For nu = 3 the t characteristic function is (1 + sqrt3 r) exp(-sqrt3 r),
  // r = s ||t||.
  auto spec = MechanismSpec::multivariate_t(3.0, 2, 3.0);
  const double s = std::sqrt(spec.scale_sq);
  for (double a : {0.0, 0.01, 0.1, 0.4, 1.3}) {
    const double r = s * std::hypot(a, 0.5 * a);
    const double want = (1 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r);
    EXPECT_NEAR(t_cf({a, 0.5 * a}, spec), want, 1e-12);
  }
}

TEST(TMechanism, VarianceAndValidation) {
  auto spec = MechanismSpec::multivariate_t(3.0, 2, 5.0);
  EXPECT_NEAR(spec.variance(), 2 * spec.scale_sq * 5.0 / 3.0, 1e-12 * spec.variance());
  spec.nu = 2.0;
  EXPECT_THROW(spec.validate(), ConfigError);
  const auto rec = MechanismSpec::multivariate_t(3.0, 2, 3.0).to_record();
  const auto back = MechanismSpec::from_record(rec);
  EXPECT_EQ(back.kind, MechanismKind::kMultivariateT);
  EXPECT_NEAR(back.scale_sq, 46.240780717895112500, 1e-9);
}

TEST(PpnCf, IsTargetOverCell) {
  const Lattice lat = Lattice::scalar_uniform(2.25, 3);
  for (double t : {0.0, 0.7, 1.9}) {
    const LatticeVector v{t, 0.0};
    EXPECT_NEAR(laplace_ppn_cf(v, 4.0, lat), laplace_cf(v, 4.0, 1) / cell_cf(lat, v), 1e-14);
  }
}

TEST(Threshold, RequiredVarianceAndCheck) {
  const double root24 = std::sqrt(24.0);
  // gamma eps / 2^R = sqrt 24 makes the cell variance equal the target.
  const double eps = 2.0;
  const int rate = 3;
  const double gamma = root24 * 8 / eps;
  const double step = 2 * gamma / 8;
  EXPECT_NEAR(laplace_required_ppn_variance(eps, step), 0.0, 1e-10);
  EXPECT_TRUE(pq_tradeoff_check(gamma, eps, rate));
  EXPECT_FALSE(pq_tradeoff_check(0.99 * gamma, eps, rate));
  EXPECT_TRUE(pq_tradeoff_check(1.01 * gamma, eps, rate));
  EXPECT_NEAR(laplace_required_ppn_variance(1.0, 1.0), 8.0 - 1.0 / 12, 1e-15);
}

TEST(DirectSampling, LaplaceLaw) {
  const auto spec = MechanismSpec::laplace(1.5, 1);
  std::vector<double> x(20000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CounterStream s(3, StreamDomain::kMechanism, 0, 0, static_cast<std::uint32_t>(i));
    x[i] = sample_mechanism(spec, s)[0];
  }
  EXPECT_TRUE(ks_test(x, [&](double v) { return laplace_cdf(v, spec.laplace_scale()); }).pass);
}

TEST(DirectSampling, TMarginalLaw) {
  const auto spec = MechanismSpec::multivariate_t(3.0, 2, 3.0);
  const double s = std::sqrt(spec.scale_sq);
  const boost::math::students_t dist(3.0);
  std::vector<double> a(20000), b(20000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CounterStream st(4, StreamDomain::kMechanism, 0, 0, static_cast<std::uint32_t>(i));
    const auto v = sample_mechanism(spec, st);
    a[i] = v[0];
    b[i] = v[1];
  }
  auto cdf = [&](double v) { return boost::math::cdf(dist, v / s); };
  EXPECT_TRUE(ks_test(a, cdf).pass);
  EXPECT_TRUE(ks_test(b, cdf).pass);
}

}  // namespace
}  // namespace jopeq
