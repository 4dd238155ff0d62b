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

#include "jopeq/task.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "jopeq/errors.hpp"
#include "jopeq/random.hpp"

namespace jopeq {
namespace {

constexpr double kXiMargin = 1.1;
constexpr int kNewtonIterations = 100;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(TaskKind kind) { return kind == TaskKind::kLinear ? "linear" : "logistic"; }

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "linear") return TaskKind::kLinear;
  if (name == "logistic") return TaskKind::kLogistic;
  throw ConfigError("unknown task: " + name);
}

void TaskSpec::validate() const {
  if (model_dim < 1) throw ConfigError("model dimension must be positive");
  if (users < 1) throw ConfigError("need at least one user");
  if (samples_per_user.empty() ||
      (samples_per_user.size() != 1 && samples_per_user.size() != static_cast<std::size_t>(users))) {
    throw ConfigError("samples_per_user needs one entry or one per user");
  }
  for (int n : samples_per_user) {
    if (n < 1) throw ConfigError("every user needs at least one sample");
  }
  if (!(regularization > 0.0)) throw ConfigError("regularization must be positive for strong convexity");
  if (!(heterogeneity >= 0.0) || !(noise_std >= 0.0)) throw ConfigError("negative task parameter");
}

Task Task::generate(const TaskSpec& spec) {
  spec.validate();
  Task t;
  t.spec_ = spec;
  const int m = spec.model_dim;
  const int k_users = spec.users;

  CounterStream truth_stream(spec.seed, StreamDomain::kData, 0xFFFFFFFFu);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w_true(m);
  const double truth_scale = spec.kind == TaskKind::kLogistic ? 2.0 / std::sqrt(m) : 1.0;
  for (int j = 0; j < m; ++j) w_true(j) = truth_scale * normal(truth_stream);

  std::size_t total = 0;
  for (int k = 0; k < k_users; ++k) {
    const int n = spec.samples_per_user.size() == 1 ? spec.samples_per_user[0]
                                                    : spec.samples_per_user[static_cast<std::size_t>(k)];
    CounterStream s(spec.seed, StreamDomain::kData, static_cast<std::uint32_t>(k));
    Eigen::VectorXd mu(m);
    for (int j = 0; j < m; ++j) mu(j) = spec.heterogeneity * normal(s);
    UserData d;
    d.x.resize(n, m);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) d.x(i, j) = mu(j) + normal(s);
      const double z = d.x.row(i).dot(w_true);
      if (spec.kind == TaskKind::kLinear) {
        d.y(i) = z + spec.noise_std * normal(s);
      } else {
        d.y(i) = s.uniform() < sigmoid(z) ? 1.0 : -1.0;
      }
    }
    total += static_cast<std::size_t>(n);
    t.data_.push_back(std::move(d));
  }
  for (int k = 0; k < k_users; ++k) {
    t.alpha_.push_back(static_cast<double>(t.data_[static_cast<std::size_t>(k)].x.rows()) /
                       static_cast<double>(total));
  }

  std::vector<int> all(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k) all[static_cast<std::size_t>(k)] = k;
  t.w_opt_ = t.minimise(all, t.alpha_);
  t.f_opt_ = t.global_loss(t.w_opt_);
  double sum_user_min = 0.0;
  for (int k = 0; k < k_users; ++k) {
    t.w_user_.push_back(t.minimise({k}, {1.0}));
    sum_user_min += t.alpha_[static_cast<std::size_t>(k)] * t.user_loss(k, t.w_user_.back());
  }
  t.psi_ = t.f_opt_ - sum_user_min;

  t.rho_s_ = 0.0;
  t.rho_c_ = std::numeric_limits<double>::infinity();
  const double lambda = spec.regularization;
  for (int k = 0; k < k_users; ++k) {
    const auto& d = t.data_[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd gram = d.x.transpose() * d.x / static_cast<double>(d.x.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double lmax = es.eigenvalues().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    if (spec.kind == TaskKind::kLinear) {
      t.rho_s_ = std::max(t.rho_s_, lmax + lambda);
      t.rho_c_ = std::min(t.rho_c_, std::max(lmin, 0.0) + lambda);
    } else {
      t.rho_s_ = std::max(t.rho_s_, 0.25 * lmax + lambda);
      t.rho_c_ = lambda;
    }
  }

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < k_users; ++k) {
    double worst = 0.0;
    const auto n = static_cast<int>(t.data_[static_cast<std::size_t>(k)].x.rows());
    const std::array<const Eigen::VectorXd*, 3> probes = {&zero, &t.w_opt_, &t.w_user_[static_cast<std::size_t>(k)]};
    for (const Eigen::VectorXd* w : probes) {
      for (int i = 0; i < n; ++i) worst = std::max(worst, t.sample_gradient(k, i, *w).norm());
    }
    t.xi_.push_back(kXiMargin * worst);
  }
  return t;
}

Eigen::VectorXd Task::minimise(const std::vector<int>& users_in,
                               const std::vector<double>& wts) const {
  const int m = spec_.model_dim;
  auto objective = [&](const Eigen::VectorXd& w) {
    double f = 0.0;
    for (std::size_t u = 0; u < users_in.size(); ++u) f += wts[u] * user_loss(users_in[u], w);
    return f;
  };
  auto gradient = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    for (std::size_t u = 0; u < users_in.size(); ++u) g += wts[u] * user_gradient(users_in[u], w);
    return g;
  };
  auto hessian = [&](const Eigen::VectorXd& w) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t u = 0; u < users_in.size(); ++u) h += wts[u] * user_hessian(users_in[u], w);
    return h;
  };
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  if (spec_.kind == TaskKind::kLinear) {
    // Normal equations: the objective is quadratic.
    return hessian(w).ldlt().solve(-gradient(w));
  }
  for (int it = 0; it < kNewtonIterations; ++it) {
    const Eigen::VectorXd g = gradient(w);
    if (g.norm() < 1e-13) break;
    const Eigen::VectorXd step = hessian(w).ldlt().solve(-g);
    double a = 1.0;
    const double f0 = objective(w);
    while (a > 1e-10 && objective(w + a * step) > f0 + 1e-4 * a * g.dot(step)) a *= 0.5;
    w += a * step;
  }
  if (!(gradient(w).norm() < 1e-9)) throw NumericError("logistic optimum did not converge");
  return w;
}

double Task::sample_loss(int k, int i, const Eigen::VectorXd& w) const {
  const auto& d = data_[static_cast<std::size_t>(k)];
  const double z = d.x.row(i).dot(w);
  const double reg = 0.5 * spec_.regularization * w.squaredNorm();
  if (spec_.kind == TaskKind::kLinear) return 0.5 * (z - d.y(i)) * (z - d.y(i)) + reg;
  return softplus(-d.y(i) * z) + reg;
}

Eigen::VectorXd Task::sample_gradient(int k, int i, const Eigen::VectorXd& w) const {
  const auto& d = data_[static_cast<std::size_t>(k)];
  const double z = d.x.row(i).dot(w);
  double coef;
  if (spec_.kind == TaskKind::kLinear) {
    coef = z - d.y(i);
  } else {
    coef = -d.y(i) * sigmoid(-d.y(i) * z);
  }
  return coef * d.x.row(i).transpose() + spec_.regularization * w;
}

double Task::user_loss(int k, const Eigen::VectorXd& w) const {
  const auto& d = data_[static_cast<std::size_t>(k)];
  const Eigen::VectorXd z = d.x * w;
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    s += spec_.kind == TaskKind::kLinear ? 0.5 * (z(i) - d.y(i)) * (z(i) - d.y(i))
                                         : softplus(-d.y(i) * z(i));
  }
  return s / static_cast<double>(z.size()) + 0.5 * spec_.regularization * w.squaredNorm();
}

Eigen::VectorXd Task::user_gradient(int k, const Eigen::VectorXd& w) const {
  const auto& d = data_[static_cast<std::size_t>(k)];
  const Eigen::VectorXd z = d.x * w;
  Eigen::VectorXd c(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    c(i) = spec_.kind == TaskKind::kLinear ? z(i) - d.y(i) : -d.y(i) * sigmoid(-d.y(i) * z(i));
  }
  return d.x.transpose() * c / static_cast<double>(z.size()) + spec_.regularization * w;
}

Eigen::MatrixXd Task::user_hessian(int k, const Eigen::VectorXd& w) const {
  const auto& d = data_[static_cast<std::size_t>(k)];
  const auto n = static_cast<double>(d.x.rows());
  Eigen::MatrixXd h;
  if (spec_.kind == TaskKind::kLinear) {
    h = d.x.transpose() * d.x / n;
  } else {
    const Eigen::VectorXd z = d.x * w;
    Eigen::VectorXd s(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = sigmoid(z(i));
      s(i) = p * (1.0 - p);
    }
    h = d.x.transpose() * s.asDiagonal() * d.x / n;
  }
  h.diagonal().array() += spec_.regularization;
  return h;
}

double Task::global_loss(const Eigen::VectorXd& w) const {
  double f = 0.0;
  for (int k = 0; k < users(); ++k) f += alpha_[static_cast<std::size_t>(k)] * user_loss(k, w);
  return f;
}

Eigen::VectorXd Task::global_gradient(const Eigen::VectorXd& w) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
  for (int k = 0; k < users(); ++k) g += alpha_[static_cast<std::size_t>(k)] * user_gradient(k, w);
  return g;
}

double Task::accuracy_proxy(const Eigen::VectorXd& w) const {
  double hits = 0.0, n = 0.0, se = 0.0, sy = 0.0, syy = 0.0;
  for (const auto& d : data_) {
    const Eigen::VectorXd z = d.x * w;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (spec_.kind == TaskKind::kLogistic) {
        hits += (z(i) >= 0.0) == (d.y(i) > 0.0) ? 1.0 : 0.0;
      } else {
        se += (z(i) - d.y(i)) * (z(i) - d.y(i));
        sy += d.y(i);
        syy += d.y(i) * d.y(i);
      }
      n += 1.0;
    }
  }
  if (spec_.kind == TaskKind::kLogistic) return hits / n;
  const double var = syy / n - (sy / n) * (sy / n);
  return 1.0 - (se / n) / var;
}

}  // namespace jopeq
