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

#include "jopeq/stattests.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jopeq/errors.hpp"
#include "jopeq/privacy.hpp"
#include "jopeq/random.hpp"

namespace jopeq {
namespace {

std::vector<double> draws(std::size_t n, std::uint64_t seed, bool gaussian) {
  CounterStream s(seed, StreamDomain::kTest);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = gaussian ? g(s) : s.uniform();
  return v;
}

TEST(Ks, HandComputedStatistic) {
  // Sorted sample 0.1, 0.4, 0.45, 0.9 against U(0, 1): the largest gap is
  // 3/4 - 0.45 = 0.3 just below the third point.
  const std::vector<double> x{0.9, 0.1, 0.45, 0.4};
  EXPECT_NEAR(ks_statistic(x, [](double v) { return uniform_cdf(v, 0, 1); }), 0.3, 1e-15);
}

TEST(Ks, SmallSamplesRejected) {
  const std::vector<double> x(999, 0.5);
  EXPECT_THROW(ks_test(x, [](double v) { return uniform_cdf(v, 0, 1); }), ConfigError);
}

TEST(Ks, NullAndAlternative) {
  const auto u = draws(100000, 1, false);
  const auto r = ks_test(u, [](double v) { return uniform_cdf(v, 0, 1); });
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.critical_value, 1.628 / std::sqrt(1e5), 1e-15);
  EXPECT_EQ(r.pass, r.statistic < r.critical_value);
  const auto g = draws(100000, 2, true);
  EXPECT_FALSE(ks_test(g, [](double v) { return uniform_cdf(v, 0, 1); }).pass);
}

TEST(Correlation, Cases) {
  const auto x = draws(20000, 3, true);
  const auto y = draws(20000, 4, true);
  const auto r = correlation_test(x, y);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.critical_value, 2.58 / std::sqrt(20000.0), 1e-15);
  EXPECT_FALSE(correlation_test(x, x).pass);
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  // Dependent but uncorrelated. The sample correlation of (x, x^2) has
  // standard deviation sqrt(E[x^2 (x^2 - 1)^2] / 2n) = sqrt(5 / n), not 1/sqrt(n),
  // so only a loose bound holds.
  EXPECT_LT(correlation_test(x, sq).statistic, 5.0 * std::sqrt(5.0 / 20000.0));
}

TEST(Cdfs, Values) {
  EXPECT_DOUBLE_EQ(laplace_cdf(0.0, 2.0), 0.5);
  EXPECT_NEAR(laplace_cdf(2.0, 2.0), 1 - 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(laplace_cdf(-2.0, 2.0), 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(uniform_cdf(-1, -0.5, 0.5), 0.0);
  EXPECT_EQ(uniform_cdf(0.25, -0.5, 0.5), 0.75);
  EXPECT_EQ(uniform_cdf(3, -0.5, 0.5), 1.0);
}

Eigen::MatrixXd points(Eigen::Index n, std::uint64_t seed, double scale) {
  CounterStream s(seed, StreamDomain::kTest);
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, 0) = g(s);
    m(i, 1) = g(s);
  }
  return m;
}

TEST(Energy, StatisticMatchesDirectSum) {
  const auto a = points(37, 5, 1.0);
  const auto b = points(41, 6, 1.5);
  auto d = [](const Eigen::MatrixXd& p, Eigen::Index i, const Eigen::MatrixXd& q, Eigen::Index j) {
    return std::sqrt((p(i, 0) - q(j, 0)) * (p(i, 0) - q(j, 0)) + (p(i, 1) - q(j, 1)) * (p(i, 1) - q(j, 1)));
  };
  double ab = 0, aa = 0, bb = 0;
  for (Eigen::Index i = 0; i < 37; ++i)
    for (Eigen::Index j = 0; j < 41; ++j) ab += d(a, i, b, j);
  for (Eigen::Index i = 0; i < 37; ++i)
    for (Eigen::Index j = 0; j < 37; ++j) aa += d(a, i, a, j);
  for (Eigen::Index i = 0; i < 41; ++i)
    for (Eigen::Index j = 0; j < 41; ++j) bb += d(b, i, b, j);
  const double want = 37.0 * 41 / 78 * (2 * ab / (37.0 * 41) - aa / (37.0 * 37) - bb / (41.0 * 41));
  EXPECT_NEAR(energy_statistic(a, b), want, 1e-12 * std::abs(want));
}

TEST(Energy, IdenticalSamplesGiveZero) {
  const auto a = points(200, 7, 1.0);
  EXPECT_EQ(energy_statistic(a, a), 0.0);
}

TEST(Energy, HalvesOfOneSamplePass) {
  const auto spec = MechanismSpec::multivariate_t(3.0, 2, 3.0);
  const Eigen::Index n = 2000;
  Eigen::MatrixXd a(n, 2), b(n, 2);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    CounterStream s(8, StreamDomain::kMechanism, static_cast<std::uint32_t>(i));
    const auto v = sample_mechanism(spec, s);
    auto& m = i < n ? a : b;
    m(i % n, 0) = v[0];
    m(i % n, 1) = v[1];
  }
  EnergyOptions o;
  o.seed = 3;
  EXPECT_TRUE(energy_distance_test(a, b, o).pass);
}

TEST(Energy, TAgainstGaussianOfEqualCovarianceFails) {
  const auto spec = MechanismSpec::multivariate_t(3.0, 2, 3.0);
  const Eigen::Index n = 10000;
  const double sd = std::sqrt(spec.per_coordinate_variance());
  Eigen::MatrixXd t(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    CounterStream s(9, StreamDomain::kMechanism, static_cast<std::uint32_t>(i));
    const auto v = sample_mechanism(spec, s);
    t(i, 0) = v[0];
    t(i, 1) = v[1];
  }
  const auto g = points(n, 10, sd);
  EnergyOptions o;
  o.seed = 4;
  EXPECT_FALSE(energy_distance_test(t, g, o).pass);
}

TEST(Energy, SerialMatchesParallelAndSeedsRepeat) {
  const auto a = points(300, 11, 1.0);
  const auto b = points(300, 12, 1.2);
  EnergyOptions o;
  o.seed = 5;
  o.exec = Execution::kParallel;
  const auto p = energy_distance_test(a, b, o);
  o.exec = Execution::kSerial;
  const auto s = energy_distance_test(a, b, o);
  EXPECT_EQ(p.statistic, s.statistic);
  EXPECT_EQ(p.critical_value, s.critical_value);
  EXPECT_EQ(p.critical_value, energy_distance_test(a, b, o).critical_value);
  o.permutations = 50;
  EXPECT_THROW(energy_distance_test(a, b, o), ConfigError);
}

}  // namespace
}  // namespace jopeq
