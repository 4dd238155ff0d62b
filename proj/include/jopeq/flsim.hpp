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

#ifndef JOPEQ_FLSIM_HPP_
#define JOPEQ_FLSIM_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "jopeq/codec.hpp"
#include "jopeq/execution.hpp"
#include "jopeq/random.hpp"
#include "jopeq/task.hpp"
#include "jopeq/uplink.hpp"

namespace jopeq {

enum class StepSchedule { kFixed, kDecaying };

struct FlConfig {
  TaskSpec task;
  int rounds = 100;
  int local_steps = 4;
  // kFixed uses eta; kDecaying uses tau / (rho_c (t + phi)).
  StepSchedule schedule = StepSchedule::kFixed;
  double eta = 0.05;
  UplinkSpec uplink;
  std::uint64_t seed = 1;
  // Metrics are kept for every log_every-th round and the last round.
  int log_every = 1;
  double divergence_threshold = 1e6;
  Execution exec = Execution::kParallel;

  void validate() const;
};

struct RoundMetrics {
  int round = 0;
  // Global SGD iteration index after the round, (round + 1) * tau.
  std::int64_t iteration = 0;
  double loss_gap = 0.0;
  double snr_db = 0.0;
  // ||w_tilde - w||^2 for this round's aggregation.
  double weights_distortion = 0.0;
  double distortion_bound = 0.0;
  double convergence_bound = 0.0;
  std::uint32_t overloads = 0;
  double accuracy = 0.0;
};

struct BoundConstants {
  double rho_s = 0.0;
  double rho_c = 0.0;
  double psi = 0.0;
  double phi = 0.0;
  double sigma2 = 0.0;
  double w0_distance_sq = 0.0;
};

struct ExperimentResult {
  std::vector<RoundMetrics> metrics;
  BoundConstants constants;
};

// phi = tau * max(1, 4 rho_s / rho_c).
double convergence_phi(int tau, double rho_s, double rho_c);

// eta_t for global iteration t.
double step_size(const FlConfig& cfg, const Task& task, std::int64_t t);

// tau single-sample SGD steps from w; iteration j uses eta(start + j).
ModelUpdate local_sgd(const Task& task, int user, const Eigen::VectorXd& w, int tau,
                      const std::function<double(std::int64_t)>& eta,
                      std::int64_t start, CounterStream& stream);

// w + sum_k alpha_k h_k.
Eigen::VectorXd fedavg_round(const Eigen::VectorXd& w,
                             std::span<const std::vector<double>> updates,
                             std::span<const double> alpha);

// 9 tau sigma^2 (sum eta^2) sum alpha_k^2 xi_k^2.
double distortion_bound(int tau, double sigma2, std::span<const double> etas,
                      std::span<const double> alpha, std::span<const double> xi);

struct ConvergenceTerms {
  double phi = 0.0;
  double b = 0.0;
  double value = 0.0;
};

ConvergenceTerms convergence_bound(std::int64_t t, int tau, double sigma2, double psi,
                             double rho_s, double rho_c, std::span<const double> alpha,
                             std::span<const double> xi, double w0_distance_sq);

double heterogeneity_gap(const Task& task);

// Keys for user k in round r derived from the experiment seed.
CodecKeys user_keys(std::uint64_t seed, int user, int round);

// Runs FedAvg with the configured uplink. Deterministic in cfg.seed; the
// parallel and serial paths agree bit-for-bit. Throws DivergenceError when
// the loss gap exceeds the threshold.
ExperimentResult run_experiment(const FlConfig& cfg);
ExperimentResult run_experiment(const FlConfig& cfg, const Task& task, const Uplink& uplink);

// Per-round, per-user updates of a distortion-free run, for channel studies.
std::vector<std::vector<ModelUpdate>> plain_updates(const FlConfig& cfg, const Task& task);

}  // namespace jopeq

#endif  // JOPEQ_FLSIM_HPP_
