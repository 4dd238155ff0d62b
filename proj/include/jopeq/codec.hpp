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

#ifndef JOPEQ_CODEC_HPP_
#define JOPEQ_CODEC_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jopeq/dither.hpp"
#include "jopeq/execution.hpp"
#include "jopeq/lattice.hpp"
#include "jopeq/ppn_sampler.hpp"

namespace jopeq {

struct ModelUpdate {
  std::vector<double> h;
  std::uint32_t user = 0;
  std::uint32_t round = 0;
};

struct EncodedUpdate {
  std::vector<std::uint32_t> indices;
  double zeta = 1.0;
  std::uint32_t overloads = 0;
  // Length of the original update; the last sub-vector may be padded.
  std::size_t dimension = 0;
  int lattice_dimension = 1;
  int rate_bits = 1;
  int index_bits = 1;

  // Index bits only; zeta and the header are excluded.
  std::size_t payload_bits() const { return indices.size() * static_cast<std::size_t>(index_bits); }
};

// M = ceil(d / L).
std::size_t subvector_count(std::size_t d, int lattice_dimension);

// zeta = sqrt(M) / (3 ||h||). Throws ConfigError for a zero-norm update.
double scale_coefficient(std::span<const double> h, std::size_t m);

struct CodecKeys {
  // Seed shared with the server; drives the dither.
  SharedRandomness shared;
  // Encoder-private seed; drives the PPN and is never sent.
  std::uint64_t private_seed = 0;
};

// Quantizes zeta*h_i + d_i + n_i for every sub-vector. `sampler` may be
// null (no privacy noise). A zero-norm update is encoded with zeta = 1.
EncodedUpdate encode(const ModelUpdate& update, const Lattice& lattice,
                     const PpnSampler* sampler, const CodecKeys& keys,
                     Execution exec = Execution::kParallel);

// h_i = (codeword - d_i) / zeta, padding stripped. Throws CorruptPayload on
// out-of-range indices or a lattice mismatch.
ModelUpdate decode(const EncodedUpdate& encoded, const Lattice& lattice,
                   const SharedRandomness& shared,
                   Execution exec = Execution::kParallel);

// Mean over users of var(h) / var(h - h_hat), in dB. +infinity when some
// user has zero distortion.
double snr_db(std::span<const std::vector<double>> h,
              std::span<const std::vector<double>> h_hat);

// Big-endian layout: u16 M, u8 L, u8 R, f64 zeta, u32 overloads, then
// ceil(log2 |codebook|)-bit indices, MSB first, zero-padded to a byte.
std::vector<std::uint8_t> serialize(const EncodedUpdate& encoded);
EncodedUpdate deserialize(std::span<const std::uint8_t> bytes, std::size_t dimension,
                          const Lattice& lattice);

}  // namespace jopeq

#endif  // JOPEQ_CODEC_HPP_
