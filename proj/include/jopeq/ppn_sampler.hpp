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

#ifndef JOPEQ_PPN_SAMPLER_HPP_
#define JOPEQ_PPN_SAMPLER_HPP_

#include <map>
#include <memory>
#include <span>
#include <string>

#include "jopeq/lattice.hpp"
#include "jopeq/privacy.hpp"
#include "jopeq/random.hpp"

namespace jopeq {

struct SamplerOptions {
  int grid_points_1d = 1 << 14;
  int grid_points_2d = 1 << 9;
  // Grid half-width in target standard deviations (plus the cell radius).
  double support_sigmas = 8.0;
  int refinement_iterations = 200;
  bool allow_degenerate = false;
};

// Quality of the tabulated PPN density. Masses are probabilities on the grid.
struct ValidityReport {
  bool degenerate = false;
  double target_variance = 0.0;    // per coordinate
  double cell_variance = 0.0;      // per coordinate
  double required_variance = 0.0;  // target - cell
  double achieved_variance = 0.0;  // per coordinate of the tabulated n
  double min_density_before_clip = 0.0;
  double clipped_mass = 0.0;
  double truncated_mass = 0.0;
  // Sum over bins of |(n + e) mass - target mass|.
  double l1_residual = 0.0;
  // Max CDF gap of n + e against the target (first-axis marginal for L = 2).
  double cdf_residual = 0.0;
  int points_per_axis = 0;
  double step = 0.0;
  double half_width = 0.0;
  int iterations = 0;

  std::map<std::string, std::string> to_record() const;
  std::string to_text() const;
};

/// Sampler for privacy-preserving noise n such that n + e, with e uniform
/// over the basic cell and independent of n, follows the target mechanism.
///
/// The density of n is tabulated on a regular grid and refined by
/// nonnegative deconvolution of the target bin masses against the cell
/// kernel. Within a bin n is uniform. Immutable and cheap to copy.
class PpnSampler {
 public:
  // Throws MechanismInfeasible when the target per-coordinate variance does
  // not exceed the cell second moment, unless allow_degenerate is set, in
  // which case the sampler returns n = 0.
  static PpnSampler build(const MechanismSpec& spec, const Lattice& lattice,
                          const SamplerOptions& options = {});

  int dimension() const;
  bool degenerate() const;
  const MechanismSpec& mechanism() const;
  const ValidityReport& report() const;

  LatticeVector sample(CounterStream& stream) const;

  // Grid description and bin masses (row-major for L = 2).
  int points_per_axis() const;
  double step() const;
  double half_width() const;
  std::span<const double> masses() const;

 private:
  struct Table;
  explicit PpnSampler(std::shared_ptr<const Table> table) : table_(std::move(table)) {}
  std::shared_ptr<const Table> table_;
};

}  // namespace jopeq

#endif  // JOPEQ_PPN_SAMPLER_HPP_
