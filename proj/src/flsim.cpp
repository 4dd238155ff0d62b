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

#include "jopeq/flsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "jopeq/errors.hpp"

namespace jopeq {

void FlConfig::validate() const {
  task.validate();
  if (rounds < 1) throw ConfigError("need at least one round");
  if (local_steps < 1) throw ConfigError("local steps must be at least 1");
  if (schedule == StepSchedule::kFixed && !(eta >= 0.0)) throw ConfigError("step size must be nonnegative");
  if (log_every < 1) throw ConfigError("log_every must be positive");
}

double convergence_phi(int tau, double rho_s, double rho_c) {
  return tau * std::max(1.0, 4.0 * rho_s / rho_c);
}

double step_size(const FlConfig& cfg, const Task& task, std::int64_t t) {
  if (cfg.schedule == StepSchedule::kFixed) return cfg.eta;
  const double phi = convergence_phi(cfg.local_steps, task.rho_s(), task.rho_c());
  return cfg.local_steps / (task.rho_c() * (static_cast<double>(t) + phi));
}

ModelUpdate local_sgd(const Task& task, int user, const Eigen::VectorXd& w, int tau,
                      const std::function<double(std::int64_t)>& eta,
                      std::int64_t start, CounterStream& stream) {
  const auto n = static_cast<int>(task.data(user).x.rows());
  std::uniform_int_distribution<int> pick(0, n - 1);
  Eigen::VectorXd v = w;
  for (int j = 0; j < tau; ++j) {
    const int i = pick(stream);
    v -= eta(start + j) * task.sample_gradient(user, i, v);
  }
  ModelUpdate h;
  h.user = static_cast<std::uint32_t>(user);
  h.h.assign(v.data(), v.data() + v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) h.h[static_cast<std::size_t>(j)] -= w(j);
  return h;
}

Eigen::VectorXd fedavg_round(const Eigen::VectorXd& w,
                             std::span<const std::vector<double>> updates,
                             std::span<const double> alpha) {
  if (updates.size() != alpha.size()) throw ConfigError("one weight per update required");
  double total = 0.0;
  for (double a : alpha) {
    if (a < 0.0) throw ConfigError("aggregation weights must be nonnegative");
    total += a;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("aggregation weights must sum to 1");
  Eigen::VectorXd out = w;
  for (std::size_t k = 0; k < updates.size(); ++k) {
    if (updates[k].size() != static_cast<std::size_t>(w.size())) throw ConfigError("update size mismatch");
    for (Eigen::Index j = 0; j < w.size(); ++j) out(j) += alpha[k] * updates[k][static_cast<std::size_t>(j)];
  }
  return out;
}

double distortion_bound(int tau, double sigma2, std::span<const double> etas,
                      std::span<const double> alpha, std::span<const double> xi) {
  double se = 0.0;
  for (double e : etas) se += e * e;
  double sa = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) sa += alpha[k] * alpha[k] * xi[k] * xi[k];
  return 9.0 * tau * sigma2 * se * sa;
}

ConvergenceTerms convergence_bound(std::int64_t t, int tau, double sigma2, double psi,
                             double rho_s, double rho_c, std::span<const double> alpha,
                             std::span<const double> xi, double w0_distance_sq) {
  ConvergenceTerms r;
  r.phi = convergence_phi(tau, rho_s, rho_c);
  double sa2 = 0.0, sa = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    sa2 += alpha[k] * alpha[k] * xi[k] * xi[k];
    sa += alpha[k] * xi[k] * xi[k];
  }
  const double tm1 = tau - 1.0;
  r.b = (1.0 + 36.0 * tau * tau * sigma2) * sa2 + 6.0 * rho_s * psi + 8.0 * tm1 * tm1 * sa;
  const double lead = (rho_c * rho_c + tau * tau * r.b) / (tau * rho_c);
  r.value = rho_s / (2.0 * (static_cast<double>(t) + r.phi)) *
            std::max(lead, r.phi * w0_distance_sq);
  return r;
}

double heterogeneity_gap(const Task& task) { return task.heterogeneity_gap(); }

CodecKeys user_keys(std::uint64_t seed, int user, int round) {
  CodecKeys keys;
  keys.shared.seed = mix64(seed ^ 0x5348415245445345ULL);
  keys.shared.user = static_cast<std::uint32_t>(user);
  keys.shared.round = static_cast<std::uint32_t>(round);
  keys.private_seed = mix64(seed ^ 0x5052495641544553ULL);
  return keys;
}

ExperimentResult run_experiment(const FlConfig& cfg) {
  cfg.validate();
  const Task task = Task::generate(cfg.task);
  const Uplink uplink(cfg.uplink);
  return run_experiment(cfg, task, uplink);
}

ExperimentResult run_experiment(const FlConfig& cfg, const Task& task, const Uplink& uplink) {
  cfg.validate();
  const int k_users = task.users();
  const int tau = cfg.local_steps;
  const auto& alpha = task.weights();
  const auto& xi = task.gradient_bounds();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(task.dim());

  ExperimentResult res;
  auto& c = res.constants;
  c.rho_s = task.rho_s();
  c.rho_c = task.rho_c();
  c.psi = task.heterogeneity_gap();
  c.phi = convergence_phi(tau, c.rho_s, c.rho_c);
  c.sigma2 = uplink.noise_variance();
  c.w0_distance_sq = (w - task.optimum()).squaredNorm();

  auto eta = [&](std::int64_t t) { return step_size(cfg, task, t); };
  std::vector<std::vector<double>> h(static_cast<std::size_t>(k_users));
  std::vector<std::vector<double>> h_hat(static_cast<std::size_t>(k_users));
  std::vector<std::uint32_t> overloads(static_cast<std::size_t>(k_users));

  for (int r = 0; r < cfg.rounds; ++r) {
    const std::int64_t start = static_cast<std::int64_t>(r) * tau;
    auto user_step = [&](int k) {
      CounterStream stream(cfg.seed, StreamDomain::kSgd, static_cast<std::uint32_t>(k),
                           static_cast<std::uint32_t>(r));
      ModelUpdate u = local_sgd(task, k, w, tau, eta, start, stream);
      u.round = static_cast<std::uint32_t>(r);
      const Uplink::Transmission tx = uplink.transmit(u, user_keys(cfg.seed, k, r), Execution::kSerial);
      h[static_cast<std::size_t>(k)] = std::move(u.h);
      h_hat[static_cast<std::size_t>(k)] = tx.h_hat;
      overloads[static_cast<std::size_t>(k)] = tx.overloads;
    };
    if (cfg.exec == Execution::kParallel) {
#pragma omp parallel for schedule(static)
      for (int k = 0; k < k_users; ++k) user_step(k);
    } else {
      for (int k = 0; k < k_users; ++k) user_step(k);
    }

    const Eigen::VectorXd w_clean = fedavg_round(w, h, alpha);
    w = fedavg_round(w, h_hat, alpha);
    const double gap = task.global_loss(w) - task.optimal_loss();
    if (!std::isfinite(gap) || gap > cfg.divergence_threshold) {
      std::ostringstream msg;
      msg << "training diverged at round " << r << ": loss gap " << gap << " (baseline "
          << to_string(uplink.baseline()) << ")";
      throw DivergenceError(msg.str());
    }
    const bool log = r % cfg.log_every == 0 || r + 1 == cfg.rounds;
    if (!log) continue;
    RoundMetrics m;
    m.round = r;
    m.iteration = start + tau;
    m.loss_gap = gap;
    m.weights_distortion = (w - w_clean).squaredNorm();
    std::vector<double> etas(static_cast<std::size_t>(tau));
    for (int j = 0; j < tau; ++j) etas[static_cast<std::size_t>(j)] = eta(start + j);
    m.distortion_bound = distortion_bound(tau, c.sigma2, etas, alpha, xi);
    m.convergence_bound =
        convergence_bound(m.iteration, tau, c.sigma2, c.psi, c.rho_s, c.rho_c, alpha, xi, c.w0_distance_sq).value;
    bool any_nonzero = false;
    for (const auto& v : h) {
      for (double x : v) any_nonzero |= x != 0.0;
    }
    m.snr_db = any_nonzero ? snr_db(h, h_hat) : 0.0;
    for (auto o : overloads) m.overloads += o;
    m.accuracy = task.accuracy_proxy(w);
    res.metrics.push_back(m);
  }
  return res;
}

std::vector<std::vector<ModelUpdate>> plain_updates(const FlConfig& cfg, const Task& task) {
  cfg.validate();
  const int tau = cfg.local_steps;
  auto eta = [&](std::int64_t t) { return step_size(cfg, task, t); };
  Eigen::VectorXd w = Eigen::VectorXd::Zero(task.dim());
  std::vector<std::vector<ModelUpdate>> out;
  for (int r = 0; r < cfg.rounds; ++r) {
    std::vector<ModelUpdate> round(static_cast<std::size_t>(task.users()));
    for (int k = 0; k < task.users(); ++k) {
      CounterStream stream(cfg.seed, StreamDomain::kSgd, static_cast<std::uint32_t>(k),
                           static_cast<std::uint32_t>(r));
      round[static_cast<std::size_t>(k)] =
          local_sgd(task, k, w, tau, eta, static_cast<std::int64_t>(r) * tau, stream);
      round[static_cast<std::size_t>(k)].round = static_cast<std::uint32_t>(r);
    }
    std::vector<std::vector<double>> hs;
    for (const auto& u : round) hs.push_back(u.h);
    w = fedavg_round(w, hs, task.weights());
    out.push_back(std::move(round));
  }
  return out;
}

}  // namespace jopeq
