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

#include "jopeq/ppn_sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "jopeq/dither.hpp"
#include "jopeq/errors.hpp"
#include "jopeq/stattests.hpp"

namespace jopeq {
namespace {

struct ScalarCase {
  double epsilon;
  int rate;
};

class ScalarSampler : public ::testing::TestWithParam<ScalarCase> {};

TEST_P(ScalarSampler, TableIsADensity) {
  const auto [eps, rate] = GetParam();
  const Lattice lat = Lattice::scalar_uniform(2.0 * rate + 1.0 / eps, rate);
  const auto s = PpnSampler::build(MechanismSpec::laplace(eps, 1), lat);
  const auto m = s.masses();
  for (double v : m) ASSERT_GE(v, 0.0);
  EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-6);
  EXPECT_LT(s.report().clipped_mass, 1e-3);
}

TEST_P(ScalarSampler, VarianceAdditivity) {
  const auto [eps, rate] = GetParam();
  const Lattice lat = Lattice::scalar_uniform(2.0 * rate + 1.0 / eps, rate);
  const auto s = PpnSampler::build(MechanismSpec::laplace(eps, 1), lat);
  const double target = 2.0 * (2.0 / eps) * (2.0 / eps);
  const double cell = lat.spacing() * lat.spacing() / 12.0;
  EXPECT_NEAR(s.report().achieved_variance + cell, target, 0.01 * target);
  CounterStream st(17, StreamDomain::kPpn);
  const int n = 200000;
  double m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.sample(st)[0];
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  const double var = m2 / n - m1 * m1;
  EXPECT_NEAR(var + cell, target, 0.03 * target);
}

INSTANTIATE_TEST_SUITE_P(ValidConfigs, ScalarSampler,
                         ::testing::Values(ScalarCase{1.0, 4}, ScalarCase{1.0, 3}, ScalarCase{2.0, 4},
                                           ScalarCase{3.0, 5}, ScalarCase{4.0, 6}));

TEST(PpnSampler, NoisePlusCellErrorIsLaplace) {
  const double eps = 1.0;
  const Lattice lat = Lattice::scalar_uniform(9.0, 4);
  const auto s = PpnSampler::build(MechanismSpec::laplace(eps, 1), lat);
  std::vector<double> z(50000);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CounterStream st(23, StreamDomain::kPpn, 0, 0, static_cast<std::uint32_t>(i));
    CounterStream dt(23, StreamDomain::kDither, 0, 0, static_cast<std::uint32_t>(i));
    z[i] = s.sample(st)[0] + sample_cell_uniform(lat, dt).e[0];
  }
  EXPECT_TRUE(ks_test(z, [](double v) { return laplace_cdf(v, 2.0); }).pass);
}

TEST(PpnSampler, InfeasibleStrictRaisesDegenerateAllowed) {
  // gamma eps / 2^R = 2 sqrt 24: cell variance above the target.
  const double eps = 1.0;
  const Lattice lat = Lattice::scalar_uniform(2 * std::sqrt(24.0) * 16 / eps, 4);
  const auto spec = MechanismSpec::laplace(eps, 1);
  EXPECT_THROW(PpnSampler::build(spec, lat), MechanismInfeasible);
  SamplerOptions opts;
  opts.allow_degenerate = true;
  const auto s = PpnSampler::build(spec, lat, opts);
  EXPECT_TRUE(s.degenerate());
  EXPECT_TRUE(s.report().degenerate);
  CounterStream st(1, StreamDomain::kPpn);
  EXPECT_EQ(s.sample(st)[0], 0.0);
}

TEST(PpnSampler, HexagonalTTable) {
  const auto spec = MechanismSpec::multivariate_t(3.0, 2, 3.0);
  const double gamma = 1.5 * (1 + spec.per_coordinate_variance());
  const Lattice lat = Lattice::from_spec({2, LatticeFamily::kHexagonal, gamma, 5});
  const auto s = PpnSampler::build(spec, lat);
  const auto m = s.masses();
  EXPECT_EQ(m.size(), static_cast<std::size_t>(s.points_per_axis()) * s.points_per_axis());
  for (double v : m) ASSERT_GE(v, 0.0);
  EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-6);
  const auto& r = s.report();
  EXPECT_LT(r.clipped_mass, 1e-2);
  EXPECT_LT(r.cdf_residual, 1e-2);
  EXPECT_GT(r.required_variance, 0.0);
}

TEST(PpnSampler, SamplingIsDeterministic) {
  const Lattice lat = Lattice::scalar_uniform(6.5, 3);
  const auto s = PpnSampler::build(MechanismSpec::laplace(2.0, 1), lat);
  CounterStream a(5, StreamDomain::kPpn, 1, 2, 3), b(5, StreamDomain::kPpn, 1, 2, 3);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(s.sample(a), s.sample(b));
}

TEST(PpnSampler, ReportRecordHasFields) {
  const Lattice lat = Lattice::scalar_uniform(6.5, 3);
  const auto s = PpnSampler::build(MechanismSpec::laplace(2.0, 1), lat);
  const auto rec = s.report().to_record();
  for (const char* k : {"clipped_mass", "min_density_before_clip", "achieved_variance",
                        "truncated_mass", "cdf_residual"}) {
    EXPECT_TRUE(rec.count(k)) << k;
  }
}

}  // namespace
}  // namespace jopeq
