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

#include "jopeq/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace jopeq {
namespace {

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, ZeroCounterZeroKey) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, AllOnes) {
  const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, PiDigits) {
  const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(CounterStream, SameCoordinatesSameSequence) {
  CounterStream a(42, StreamDomain::kDither, 1, 2, 3);
  CounterStream b(42, StreamDomain::kDither, 1, 2, 3);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(CounterStream, CoordinatesAndDomainsSeparate) {
  std::set<std::uint64_t> first;
  first.insert(CounterStream(42, StreamDomain::kDither, 1, 2, 3)());
  first.insert(CounterStream(42, StreamDomain::kPpn, 1, 2, 3)());
  first.insert(CounterStream(42, StreamDomain::kDither, 2, 2, 3)());
  first.insert(CounterStream(42, StreamDomain::kDither, 1, 3, 3)());
  first.insert(CounterStream(42, StreamDomain::kDither, 1, 2, 4)());
  first.insert(CounterStream(43, StreamDomain::kDither, 1, 2, 3)());
  EXPECT_EQ(first.size(), 6u);
}

TEST(CounterStream, UniformMoments) {
  CounterStream s(7, StreamDomain::kTest);
  const int n = 200000;
  double m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    m1 += u;
    m2 += u * u;
  }
  m1 /= n;
  m2 /= n;
  EXPECT_NEAR(m1, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(m2 - m1 * m1, 1.0 / 12, 0.002);
}

TEST(Mix64, IsBijectiveOnSample) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(mix64(i));
  EXPECT_EQ(seen.size(), 10000u);
}

}  // namespace
}  // namespace jopeq
