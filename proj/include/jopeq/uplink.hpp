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

#ifndef JOPEQ_UPLINK_HPP_
#define JOPEQ_UPLINK_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jopeq/codec.hpp"
#include "jopeq/lattice.hpp"
#include "jopeq/ppn_sampler.hpp"
#include "jopeq/privacy.hpp"

namespace jopeq {

// kPlain: no distortion. kSdqOnly: SDQ compression. kPpnOnly: the mechanism
// noise added to the scaled update. kSeparate: kPpnOnly followed by kSdqOnly
// with its own scaling coefficient. kJopeq: PPN inside the dithered quantizer.
enum class Baseline { kPlain, kSdqOnly, kPpnOnly, kSeparate, kJopeq };

std::string to_string(Baseline baseline);
Baseline baseline_from_string(const std::string& name);

struct UplinkSpec {
  Baseline baseline = Baseline::kJopeq;
  int lattice_dimension = 1;
  LatticeFamily family = LatticeFamily::kScalar;
  int rate_bits = 1;
  // Non-positive selects the support rule of gamma_rule().
  double gamma = 0.0;
  MechanismKind mechanism = MechanismKind::kLaplace;
  double epsilon = 4.0;
  double nu = 3.0;
  TExponent exponent = kDefaultTExponent;
  SamplerOptions sampler;

  std::map<std::string, std::string> to_record() const;
};

// 2R + 1/eps for L = 1; 1.5 (1 + s^2 nu / (nu - 2)) for the t mechanism in
// L = 2; 1.5 (1 + 2 b^2) for Laplace in L = 2.
double gamma_rule(const MechanismSpec& mechanism, int rate_bits);

/// One user-to-server channel for a given baseline. Immutable after
/// construction; transmit() is safe to call concurrently.
class Uplink {
 public:
  explicit Uplink(const UplinkSpec& spec);

  const UplinkSpec& spec() const { return spec_; }
  Baseline baseline() const { return spec_.baseline; }
  bool has_lattice() const { return lattice_.has_value(); }
  const Lattice& lattice() const;
  const MechanismSpec& mechanism() const { return mechanism_; }
  const PpnSampler* sampler() const { return sampler_.get(); }
  double gamma() const { return gamma_; }

  // Variance of the per-sub-vector distortion in the scaled domain, summed
  // over the L coordinates: the mechanism variance for the private
  // baselines, L times the cell second moment for kSdqOnly, 0 for kPlain.
  double noise_variance() const;

  struct Transmission {
    std::vector<double> h_hat;
    std::uint32_t overloads = 0;
    std::size_t payload_bits = 0;
  };

  Transmission transmit(const ModelUpdate& update, const CodecKeys& keys,
                        Execution exec = Execution::kSerial) const;

 private:
  std::vector<double> add_mechanism_noise(const ModelUpdate& update, const CodecKeys& keys) const;

  UplinkSpec spec_;
  MechanismSpec mechanism_;
  double gamma_ = 0.0;
  std::optional<Lattice> lattice_;
  std::shared_ptr<const PpnSampler> sampler_;
};

}  // namespace jopeq

#endif  // JOPEQ_UPLINK_HPP_
