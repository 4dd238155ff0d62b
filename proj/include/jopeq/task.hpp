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

#ifndef JOPEQ_TASK_HPP_
#define JOPEQ_TASK_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace jopeq {

enum class TaskKind { kLinear, kLogistic };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

struct TaskSpec {
  TaskKind kind = TaskKind::kLinear;
  int model_dim = 10;
  int users = 10;
  // One entry per user, or a single entry shared by all users.
  std::vector<int> samples_per_user = {200};
  // Per-user feature mean is heterogeneity * g_k with g_k ~ N(0, I).
  double heterogeneity = 0.5;
  double regularization = 0.1;
  // Label noise standard deviation (linear task).
  double noise_std = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct UserData {
  Eigen::MatrixXd x;  // samples x model_dim
  Eigen::VectorXd y;
};

/// Synthetic strongly convex FL objective with per-user datasets.
///
/// Per-sample loss is 0.5 (x.w - y)^2 (linear) or log(1 + exp(-y x.w))
/// (logistic, labels +-1), plus (lambda/2) ||w||^2. F_k is the mean over the
/// user's samples and F = sum_k alpha_k F_k with alpha_k = n_k / n.
class Task {
 public:
  static Task generate(const TaskSpec& spec);

  const TaskSpec& spec() const { return spec_; }
  int users() const { return static_cast<int>(data_.size()); }
  int dim() const { return spec_.model_dim; }
  const UserData& data(int k) const { return data_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& weights() const { return alpha_; }

  double sample_loss(int k, int i, const Eigen::VectorXd& w) const;
  Eigen::VectorXd sample_gradient(int k, int i, const Eigen::VectorXd& w) const;
  double user_loss(int k, const Eigen::VectorXd& w) const;
  Eigen::VectorXd user_gradient(int k, const Eigen::VectorXd& w) const;
  Eigen::MatrixXd user_hessian(int k, const Eigen::VectorXd& w) const;
  double global_loss(const Eigen::VectorXd& w) const;
  Eigen::VectorXd global_gradient(const Eigen::VectorXd& w) const;

  const Eigen::VectorXd& optimum() const { return w_opt_; }
  double optimal_loss() const { return f_opt_; }
  const Eigen::VectorXd& user_optimum(int k) const { return w_user_[static_cast<std::size_t>(k)]; }

  // Smoothness and strong-convexity constants valid for every F_k.
  double rho_s() const { return rho_s_; }
  double rho_c() const { return rho_c_; }
  // F(w_opt) - sum_k alpha_k min F_k.
  double heterogeneity_gap() const { return psi_; }
  // 1.1 x the largest per-sample gradient norm seen at w = 0, w_opt and the
  // user's own minimiser.
  const std::vector<double>& gradient_bounds() const { return xi_; }

  // Fraction of correctly signed predictions (logistic) or 1 - MSE/var(y)
  // (linear) over all users' data.
  double accuracy_proxy(const Eigen::VectorXd& w) const;

 private:
  Task() = default;
  Eigen::VectorXd minimise(const std::vector<int>& users_in, const std::vector<double>& wts) const;

  TaskSpec spec_;
  std::vector<UserData> data_;
  std::vector<double> alpha_;
  Eigen::VectorXd w_opt_;
  double f_opt_ = 0.0;
  std::vector<Eigen::VectorXd> w_user_;
  double rho_s_ = 0.0;
  double rho_c_ = 0.0;
  double psi_ = 0.0;
  std::vector<double> xi_;
};

}  // namespace jopeq

#endif  // JOPEQ_TASK_HPP_
