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

#ifndef JOPEQ_RANDOM_HPP_
#define JOPEQ_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <limits>

namespace jopeq {

// Separates independent uses of one seed.
enum class StreamDomain : std::uint32_t {
  kDither = 0x44495448,
  kPpn = 0x50504e31,
  kData = 0x44415441,
  kSgd = 0x53474431,
  kMechanism = 0x4d454348,
  kTest = 0x54455354,
  kPermutation = 0x5045524d,
};

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// The stream is a pure function of (seed, domain, c0, c1, c2): the words
/// c0..c2 are the caller's coordinates (typically user, round and sub-vector
/// index) and the fourth counter word enumerates blocks. Two streams built
/// from the same arguments produce identical sequences, which is what lets
/// the server regenerate dither without communication.
///
/// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t seed, StreamDomain domain, std::uint32_t c0 = 0,
                std::uint32_t c1 = 0, std::uint32_t c2 = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int next_word_ = 4;
};

// SplitMix64 finaliser, used for key derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace jopeq

#endif  // JOPEQ_RANDOM_HPP_
