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

#include <bit>
#include <cmath>
#include <cstring>

#include "jopeq/codec.hpp"
#include "jopeq/errors.hpp"

namespace jopeq {
namespace {

constexpr std::size_t kHeaderBytes = 2 + 1 + 1 + 8 + 4;

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int b = bytes - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t& pos, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v = (v << 8) | in[pos++];
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize(const EncodedUpdate& encoded) {
  if (encoded.indices.size() > 0xFFFF) throw ConfigError("too many sub-vectors for the u16 header");
  if (encoded.index_bits < 0 || encoded.index_bits > 32) throw ConfigError("invalid index width");
  std::vector<std::uint8_t> out;
  const std::size_t bits = encoded.payload_bits();
  out.reserve(kHeaderBytes + (bits + 7) / 8);
  put_be(out, encoded.indices.size(), 2);
  put_be(out, static_cast<std::uint64_t>(encoded.lattice_dimension), 1);
  put_be(out, static_cast<std::uint64_t>(encoded.rate_bits), 1);
  put_be(out, std::bit_cast<std::uint64_t>(encoded.zeta), 8);
  put_be(out, encoded.overloads, 4);
  std::uint64_t acc = 0;
  int filled = 0;
  for (auto idx : encoded.indices) {
    for (int b = encoded.index_bits - 1; b >= 0; --b) {
      acc = (acc << 1) | ((idx >> b) & 1u);
      if (++filled == 8) {
        out.push_back(static_cast<std::uint8_t>(acc));
        acc = 0;
        filled = 0;
      }
    }
  }
  if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
  return out;
}

EncodedUpdate deserialize(std::span<const std::uint8_t> bytes, std::size_t dimension,
                          const Lattice& lattice) {
  if (bytes.size() < kHeaderBytes) throw CorruptPayload("payload shorter than header");
  std::size_t pos = 0;
  EncodedUpdate enc;
  const auto m = static_cast<std::size_t>(get_be(bytes, pos, 2));
  enc.lattice_dimension = static_cast<int>(get_be(bytes, pos, 1));
  enc.rate_bits = static_cast<int>(get_be(bytes, pos, 1));
  enc.zeta = std::bit_cast<double>(get_be(bytes, pos, 8));
  enc.overloads = static_cast<std::uint32_t>(get_be(bytes, pos, 4));
  enc.dimension = dimension;
  enc.index_bits = lattice.index_bits();
  if (enc.lattice_dimension != lattice.dimension()) throw CorruptPayload("lattice dimension mismatch");
  if (enc.rate_bits != lattice.nominal_rate_bits()) throw CorruptPayload("rate mismatch");
  if (m != subvector_count(dimension, enc.lattice_dimension)) {
    throw CorruptPayload("sub-vector count does not match the update dimension");
  }
  if (!(enc.zeta > 0.0) || !std::isfinite(enc.zeta)) throw CorruptPayload("invalid scaling coefficient");
  const std::size_t bits = m * static_cast<std::size_t>(enc.index_bits);
  if (bytes.size() != kHeaderBytes + (bits + 7) / 8) throw CorruptPayload("payload length mismatch");
  enc.indices.resize(m);
  std::size_t bit = 0;
  const std::size_t cb = lattice.codebook_size();
  for (std::size_t i = 0; i < m; ++i) {
    std::uint32_t v = 0;
    for (int b = 0; b < enc.index_bits; ++b, ++bit) {
      const std::uint8_t byte = bytes[kHeaderBytes + bit / 8];
      v = (v << 1) | ((byte >> (7 - bit % 8)) & 1u);
    }
    if (v >= cb) throw CorruptPayload("codebook index out of range");
    enc.indices[i] = v;
  }
  return enc;
}

}  // namespace jopeq
