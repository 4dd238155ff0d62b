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

#include "jopeq/codec.hpp"

#include <cmath>
#include <limits>

#include "jopeq/errors.hpp"

namespace jopeq {

std::size_t subvector_count(std::size_t d, int lattice_dimension) {
  if (lattice_dimension < 1) throw ConfigError("lattice dimension must be positive");
  const auto l = static_cast<std::size_t>(lattice_dimension);
  return (d + l - 1) / l;
}

double scale_coefficient(std::span<const double> h, std::size_t m) {
  double s = 0.0;
  for (double v : h) s += v * v;
  const double norm = std::sqrt(s);
  if (!(norm > 0.0)) throw ConfigError("scaling coefficient undefined for a zero update");
  return std::sqrt(static_cast<double>(m)) / (3.0 * norm);
}

EncodedUpdate encode(const ModelUpdate& update, const Lattice& lattice,
                     const PpnSampler* sampler, const CodecKeys& keys,
                     Execution exec) {
  const int dim = lattice.dimension();
  if (sampler && sampler->dimension() != dim) {
    throw ConfigError("lattice and PPN sampler dimensions differ");
  }
  for (double v : update.h) {
    if (!std::isfinite(v)) throw ConfigError("model update has non-finite entries");
  }
  const std::size_t d = update.h.size();
  const std::size_t m = subvector_count(d, dim);
  EncodedUpdate out;
  out.dimension = d;
  out.lattice_dimension = dim;
  out.rate_bits = lattice.nominal_rate_bits();
  out.index_bits = lattice.index_bits();
  out.indices.assign(m, 0);
  double zeta = 1.0;
  double s = 0.0;
  for (double v : update.h) s += v * v;
  if (s > 0.0) zeta = scale_coefficient(update.h, m);
  out.zeta = zeta;

  const auto n = static_cast<std::int64_t>(m);
  std::uint32_t overloads = 0;
  auto body = [&](std::int64_t i) -> bool {
    LatticeVector x{};
    for (int l = 0; l < dim; ++l) {
      const std::size_t k = static_cast<std::size_t>(i) * dim + l;
      if (k < d) x[l] = zeta * update.h[k];
    }
    if (sampler) {
      CounterStream ppn(keys.private_seed, StreamDomain::kPpn, keys.shared.user,
                        keys.shared.round, static_cast<std::uint32_t>(i));
      const LatticeVector noise = sampler->sample(ppn);
      for (int l = 0; l < dim; ++l) x[l] += noise[l];
    }
    const CellSample dither = dither_for(keys.shared.at(static_cast<std::uint32_t>(i)), lattice);
    const SdqResult q = dq(lattice, x, dither);
    out.indices[static_cast<std::size_t>(i)] = q.index;
    return q.overloaded;
  };
  if (exec == Execution::kParallel) {
#pragma omp parallel for reduction(+ : overloads) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) overloads += body(i) ? 1u : 0u;
  } else {
    for (std::int64_t i = 0; i < n; ++i) overloads += body(i) ? 1u : 0u;
  }
  out.overloads = overloads;
  return out;
}

ModelUpdate decode(const EncodedUpdate& encoded, const Lattice& lattice,
                   const SharedRandomness& shared, Execution exec) {
  const int dim = lattice.dimension();
  if (encoded.lattice_dimension != dim) throw CorruptPayload("lattice dimension mismatch");
  if (encoded.indices.size() != subvector_count(encoded.dimension, dim)) {
    throw CorruptPayload("sub-vector count does not match the update dimension");
  }
  if (!(encoded.zeta > 0.0) || !std::isfinite(encoded.zeta)) {
    throw CorruptPayload("scaling coefficient must be positive and finite");
  }
  const std::size_t cb = lattice.codebook_size();
  for (auto idx : encoded.indices) {
    if (idx >= cb) throw CorruptPayload("codebook index out of range");
  }
  ModelUpdate out;
  out.user = shared.user;
  out.round = shared.round;
  out.h.assign(encoded.dimension, 0.0);
  const double inv = 1.0 / encoded.zeta;
  const auto n = static_cast<std::int64_t>(encoded.indices.size());
  auto body = [&](std::int64_t i) {
    const LatticeVector& c = lattice.codebook()[encoded.indices[static_cast<std::size_t>(i)]];
    const CellSample dither = dither_for(shared.at(static_cast<std::uint32_t>(i)), lattice);
    for (int l = 0; l < dim; ++l) {
      const std::size_t k = static_cast<std::size_t>(i) * dim + l;
      if (k < encoded.dimension) out.h[k] = inv * (c[l] - dither.e[l]);
    }
  };
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }
  return out;
}

double snr_db(std::span<const std::vector<double>> h,
              std::span<const std::vector<double>> h_hat) {
  if (h.size() != h_hat.size() || h.empty()) throw ConfigError("SNR needs matched non-empty lists");
  auto variance = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
  };
  double ratio = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k].size() != h_hat[k].size() || h[k].empty()) {
      throw ConfigError("SNR needs matched non-empty updates");
    }
    std::vector<double> diff(h[k].size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = h[k][j] - h_hat[k][j];
    const double vd = variance(diff);
    if (vd == 0.0) return std::numeric_limits<double>::infinity();
    ratio += variance(h[k]) / vd;
  }
  return 10.0 * std::log10(ratio / static_cast<double>(h.size()));
}

}  // namespace jopeq
