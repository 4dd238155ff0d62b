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

namespace jopeq {

CellSample dither_for(const SharedRandomness& sr, const Lattice& lattice) {
  CounterStream stream(sr.seed, StreamDomain::kDither, sr.user, sr.round,
                       sr.subvector);
  return sample_cell_uniform(lattice, stream);
}

SdqResult dq(const Lattice& lattice, const LatticeVector& x, const CellSample& d) {
  LatticeVector y{};
  for (int i = 0; i < lattice.dimension(); ++i) y[i] = x[i] + d.e[i];
  const ClippedQuantization q = lattice.quantize_clipped(y);
  return SdqResult{q.point, q.index, q.overloaded};
}

SdqResult sdq(const Lattice& lattice, const LatticeVector& x, const CellSample& d) {
  SdqResult r = dq(lattice, x, d);
  for (int i = 0; i < lattice.dimension(); ++i) r.output[i] -= d.e[i];
  return r;
}

}  // namespace jopeq
