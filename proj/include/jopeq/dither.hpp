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

#ifndef JOPEQ_DITHER_HPP_
#define JOPEQ_DITHER_HPP_

#include <cstdint>

#include "jopeq/lattice.hpp"

namespace jopeq {

// Seed shared by one user and the server, plus the coordinates of one
// sub-vector. Identical values on both sides give identical dither.
struct SharedRandomness {
  std::uint64_t seed = 0;
  std::uint32_t user = 0;
  std::uint32_t round = 0;
  std::uint32_t subvector = 0;

  SharedRandomness at(std::uint32_t i) const {
    SharedRandomness out = *this;
    out.subvector = i;
    return out;
  }
};

// Dither vector uniform over the basic cell, a pure function of `sr`.
CellSample dither_for(const SharedRandomness& sr, const Lattice& lattice);

struct SdqResult {
  LatticeVector output{};
  std::uint32_t index = 0;
  bool overloaded = false;
};

// Dithered quantization: Q(x + d) restricted to the codebook.
SdqResult dq(const Lattice& lattice, const LatticeVector& x, const CellSample& d);

// Subtractive dithered quantization: Q(x + d) - d.
SdqResult sdq(const Lattice& lattice, const LatticeVector& x, const CellSample& d);

}  // namespace jopeq

#endif  // JOPEQ_DITHER_HPP_
