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

#include "jopeq/dither.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace jopeq {
namespace {

TEST(Dither, PureFunctionOfSharedRandomness) {
  const Lattice lat = Lattice::from_spec({2, LatticeFamily::kHexagonal, 2.0, 4});
  const SharedRandomness sr{99, 3, 7, 11};
  const auto a = dither_for(sr, lat);
  const auto b = dither_for(sr, lat);
  EXPECT_EQ(a.e, b.e);
  EXPECT_NE(dither_for(sr.at(12), lat).e, a.e);
  SharedRandomness other = sr;
  other.user = 4;
  EXPECT_NE(dither_for(other, lat).e, a.e);
}

TEST(Dither, LiesInBasicCell) {
  const Lattice lat = Lattice::scalar_uniform(3.0, 3);
  const SharedRandomness sr{1, 0, 0, 0};
  for (std::uint32_t i = 0; i < 10000; ++i) {
    const auto d = dither_for(sr.at(i), lat);
    ASSERT_LE(std::abs(d.e[0]), lat.spacing() / 2);
    ASSERT_EQ(d.e[1], 0.0);
  }
}

TEST(Sdq, ErrorInsideCellWhenNotOverloaded) {
  const Lattice lat = Lattice::from_spec({2, LatticeFamily::kHexagonal, 4.0, 5});
  const SharedRandomness sr{5, 0, 0, 0};
  CounterStream in(5, StreamDomain::kTest);
  for (std::uint32_t i = 0; i < 5000; ++i) {
    const LatticeVector x{in.uniform() * 4 - 2, in.uniform() * 4 - 2};
    const auto d = dither_for(sr.at(i), lat);
    const auto r = sdq(lat, x, d);
    ASSERT_FALSE(r.overloaded);
    const LatticeVector e{r.output[0] - x[0], r.output[1] - x[1]};
    ASSERT_EQ(lat.nearest_point(e).coords, (IntegerVector{0, 0}));
    const auto q = dq(lat, x, d);
    EXPECT_EQ(q.index, r.index);
    EXPECT_DOUBLE_EQ(q.output[0] - d.e[0], r.output[0]);
  }
}

TEST(Sdq, ScalarExample) {
  const Lattice lat = Lattice::scalar_uniform(2.0, 2);
  const auto r = dq(lat, {0.7, 0.0}, CellSample{{0.2, 0.0}});
  EXPECT_EQ(r.output[0], 1.0);
  const auto s = sdq(lat, {0.7, 0.0}, CellSample{{0.2, 0.0}});
  EXPECT_DOUBLE_EQ(s.output[0], 0.8);
  EXPECT_FALSE(s.overloaded);
}

}  // namespace
}  // namespace jopeq
