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

#ifndef JOPEQ_SWEEP_HPP_
#define JOPEQ_SWEEP_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jopeq/config.hpp"
#include "jopeq/flsim.hpp"

namespace jopeq {

inline constexpr const char* kCsvSchemaLine = "# jopeq-csv v1";

struct SnrPoint {
  int lattice_dim = 1;
  int rate_bits = 1;
  double epsilon = 0.0;
  Baseline baseline = Baseline::kJopeq;
  double gamma = 0.0;
  double snr_db = 0.0;
  std::uint64_t overloads = 0;
  std::uint64_t subvectors = 0;
  // "ok", or the error class when the point could not be built.
  std::string status = "ok";
};

// Every (L, R, eps, baseline) point transmits the same set of updates: the
// per-user updates of a distortion-free run of cfg.fl for snr_rounds rounds.
// Points run in parallel; the result order is the sweep order.
std::vector<SnrPoint> snr_sweep(const ExperimentConfig& cfg);

// SNR of one uplink over a fixed update set, with keys from `seed`.
SnrPoint measure_snr(const UplinkSpec& spec, const std::vector<std::vector<ModelUpdate>>& updates,
                     std::uint64_t seed);

struct LearningCurve {
  Baseline baseline = Baseline::kJopeq;
  std::string status = "ok";
  ExperimentResult result;
};

// One FL run per configured baseline at the configured rate and epsilon.
std::vector<LearningCurve> learning_curves(const ExperimentConfig& cfg);

std::string snr_csv(const std::vector<SnrPoint>& points);
std::string learning_curve_csv(const std::vector<LearningCurve>& curves);
std::string summary_json(const ExperimentConfig& cfg, const std::vector<SnrPoint>& points,
                         const std::vector<LearningCurve>& curves);

struct SweepFiles {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

SweepFiles run_sweep(const ExperimentConfig& cfg);
// Writes every file under dir (created if needed) from the calling thread.
void write_files(const SweepFiles& out, const std::string& dir);

}  // namespace jopeq

#endif  // JOPEQ_SWEEP_HPP_
