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

#include "jopeq/uplink.hpp"

#include <cmath>
#include <sstream>

#include "jopeq/errors.hpp"

namespace jopeq {

std::string to_string(Baseline baseline) {
  switch (baseline) {
    case Baseline::kPlain:
      return "plain";
    case Baseline::kSdqOnly:
      return "sdq";
    case Baseline::kPpnOnly:
      return "ppn";
    case Baseline::kSeparate:
      return "separate";
    case Baseline::kJopeq:
      return "jopeq";
  }
  return "unknown";
}

Baseline baseline_from_string(const std::string& name) {
  if (name == "plain") return Baseline::kPlain;
  if (name == "sdq") return Baseline::kSdqOnly;
  if (name == "ppn") return Baseline::kPpnOnly;
  if (name == "separate") return Baseline::kSeparate;
  if (name == "jopeq") return Baseline::kJopeq;
  throw ConfigError("unknown baseline: " + name);
}

std::map<std::string, std::string> UplinkSpec::to_record() const {
  std::ostringstream g, e, n;
  g.precision(17);
  e.precision(17);
  n.precision(17);
  g << gamma;
  e << epsilon;
  n << nu;
  return {{"baseline", to_string(baseline)},
          {"lattice_dimension", std::to_string(lattice_dimension)},
          {"family", to_string(family)},
          {"rate", std::to_string(rate_bits)},
          {"gamma", g.str()},
          {"mechanism", to_string(mechanism)},
          {"epsilon", e.str()},
          {"nu", n.str()},
          {"exponent", exponent == TExponent::kAsPrinted ? "as_printed" : "half"},
          {"allow_degenerate", sampler.allow_degenerate ? "true" : "false"}};
}

double gamma_rule(const MechanismSpec& mechanism, int rate_bits) {
  if (mechanism.dimension == 1) return 2.0 * rate_bits + 1.0 / mechanism.epsilon;
  return 1.5 * (1.0 + mechanism.per_coordinate_variance());
}

Uplink::Uplink(const UplinkSpec& spec) : spec_(spec) {
  if (spec.lattice_dimension < 1 || spec.lattice_dimension > kMaxLatticeDim) {
    throw ConfigError("lattice dimension must be 1 or 2");
  }
  mechanism_ = spec.mechanism == MechanismKind::kLaplace
                   ? MechanismSpec::laplace(spec.epsilon, spec.lattice_dimension)
                   : MechanismSpec::multivariate_t(spec.epsilon, spec.lattice_dimension,
                                                   spec.nu, spec.exponent);
  gamma_ = spec.gamma > 0.0 ? spec.gamma : gamma_rule(mechanism_, spec.rate_bits);
  const bool quantized = spec.baseline == Baseline::kSdqOnly ||
                         spec.baseline == Baseline::kSeparate ||
                         spec.baseline == Baseline::kJopeq;
  if (quantized) {
    LatticeSpec ls;
    ls.dimension = spec.lattice_dimension;
    ls.family = spec.lattice_dimension == 1 ? LatticeFamily::kScalar : spec.family;
    ls.support_radius = gamma_;
    ls.rate_bits = spec.rate_bits;
    lattice_ = Lattice::from_spec(ls);
  }
  if (spec.baseline == Baseline::kJopeq) {
    sampler_ = std::make_shared<const PpnSampler>(
        PpnSampler::build(mechanism_, *lattice_, spec.sampler));
  }
}

const Lattice& Uplink::lattice() const {
  if (!lattice_) throw ConfigError("baseline has no quantizer");
  return *lattice_;
}

double Uplink::noise_variance() const {
  switch (spec_.baseline) {
    case Baseline::kPlain:
      return 0.0;
    case Baseline::kSdqOnly:
      return lattice_->dimension() * lattice_->cell_second_moment();
    default:
      return mechanism_.variance();
  }
}

std::vector<double> Uplink::add_mechanism_noise(const ModelUpdate& update,
                                                const CodecKeys& keys) const {
  const int dim = spec_.lattice_dimension;
  const std::size_t d = update.h.size();
  const std::size_t m = subvector_count(d, dim);
  double s = 0.0;
  for (double v : update.h) s += v * v;
  const double zeta = s > 0.0 ? scale_coefficient(update.h, m) : 1.0;
  std::vector<double> out = update.h;
  for (std::size_t i = 0; i < m; ++i) {
    CounterStream stream(keys.private_seed, StreamDomain::kMechanism, keys.shared.user,
                         keys.shared.round, static_cast<std::uint32_t>(i));
    const LatticeVector n = sample_mechanism(mechanism_, stream);
    for (int l = 0; l < dim; ++l) {
      const std::size_t k = i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(l);
      if (k < d) out[k] += n[l] / zeta;
    }
  }
  return out;
}

Uplink::Transmission Uplink::transmit(const ModelUpdate& update, const CodecKeys& keys,
                                      Execution exec) const {
  Transmission t;
  switch (spec_.baseline) {
    case Baseline::kPlain:
      t.h_hat = update.h;
      t.payload_bits = update.h.size() * 64;
      return t;
    case Baseline::kPpnOnly:
      t.h_hat = add_mechanism_noise(update, keys);
      t.payload_bits = update.h.size() * 64;
      return t;
    case Baseline::kSdqOnly:
    case Baseline::kJopeq: {
      const EncodedUpdate enc = encode(update, *lattice_, sampler_.get(), keys, exec);
      t.h_hat = decode(enc, *lattice_, keys.shared, exec).h;
      t.overloads = enc.overloads;
      t.payload_bits = enc.payload_bits();
      return t;
    }
    case Baseline::kSeparate: {
      ModelUpdate noisy = update;
      noisy.h = add_mechanism_noise(update, keys);
      const EncodedUpdate enc = encode(noisy, *lattice_, nullptr, keys, exec);
      t.h_hat = decode(enc, *lattice_, keys.shared, exec).h;
      t.overloads = enc.overloads;
      t.payload_bits = enc.payload_bits();
      return t;
    }
  }
  return t;
}

}  // namespace jopeq
