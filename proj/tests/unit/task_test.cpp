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

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

#include "jopeq/errors.hpp"

namespace jopeq {
namespace {

TaskSpec spec_of(TaskKind kind) {
  TaskSpec s;
  s.kind = kind;
  s.model_dim = 6;
  s.users = 4;
  s.samples_per_user = {120};
  s.seed = 3;
  return s;
}

Eigen::VectorXd probe(int m, double scale) {
  Eigen::VectorXd w(m);
  for (int j = 0; j < m; ++j) w(j) = scale * std::sin(1.3 * j + 0.4);
  return w;
}

class TaskKinds : public ::testing::TestWithParam<TaskKind> {};

TEST_P(TaskKinds, GradientsMatchCentralDifferences) {
  const Task t = Task::generate(spec_of(GetParam()));
  const Eigen::VectorXd w = probe(t.dim(), 0.7);
  const double h = 1e-6;
  auto check = [&](const Eigen::VectorXd& g, const std::function<double(const Eigen::VectorXd&)>& f) {
    Eigen::VectorXd fd(t.dim());
    for (int j = 0; j < t.dim(); ++j) {
      Eigen::VectorXd a = w, b = w;
      a(j) += h;
      b(j) -= h;
      fd(j) = (f(a) - f(b)) / (2 * h);
    }
    EXPECT_LT((g - fd).norm() / g.norm(), 1e-6);
  };
  check(t.sample_gradient(1, 7, w), [&](const Eigen::VectorXd& v) { return t.sample_loss(1, 7, v); });
  check(t.user_gradient(2, w), [&](const Eigen::VectorXd& v) { return t.user_loss(2, v); });
  check(t.global_gradient(w), [&](const Eigen::VectorXd& v) { return t.global_loss(v); });
}

TEST_P(TaskKinds, HessianMatchesGradientDifferences) {
  const Task t = Task::generate(spec_of(GetParam()));
  const Eigen::VectorXd w = probe(t.dim(), 0.3);
  const Eigen::MatrixXd hess = t.user_hessian(0, w);
  const double h = 1e-5;
  for (int j = 0; j < t.dim(); ++j) {
    Eigen::VectorXd a = w, b = w;
    a(j) += h;
    b(j) -= h;
    const Eigen::VectorXd col = (t.user_gradient(0, a) - t.user_gradient(0, b)) / (2 * h);
    EXPECT_LT((hess.col(j) - col).norm(), 1e-7 * hess.norm());
  }
}

TEST_P(TaskKinds, OptimumIsStationaryAndConstantsConsistent) {
  const Task t = Task::generate(spec_of(GetParam()));
  EXPECT_LT(t.global_gradient(t.optimum()).norm(), 1e-9);
  for (int k = 0; k < t.users(); ++k) EXPECT_LT(t.user_gradient(k, t.user_optimum(k)).norm(), 1e-9);
  EXPECT_GT(t.rho_c(), 0.0);
  EXPECT_GE(t.rho_s(), t.rho_c());
  EXPECT_GE(t.heterogeneity_gap(), 0.0);
  for (double xi : t.gradient_bounds()) EXPECT_GT(xi, 0.0);
  EXPECT_NEAR(std::accumulate(t.weights().begin(), t.weights().end(), 0.0), 1.0, 1e-15);
}

INSTANTIATE_TEST_SUITE_P(Kinds, TaskKinds, ::testing::Values(TaskKind::kLinear, TaskKind::kLogistic));

TEST(LinearTask, ClosedFormAgreesWithGradientDescent) {
  const Task t = Task::generate(spec_of(TaskKind::kLinear));
  // Plain gradient descent with step 1/rho_s converges linearly.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(t.dim());
  const double step = 1.0 / t.rho_s();
  for (int it = 0; it < 20000 && t.global_gradient(w).norm() > 1e-13; ++it) {
    w -= step * t.global_gradient(w);
  }
  EXPECT_LT((w - t.optimum()).norm(), 1e-8);
  EXPECT_NEAR(t.optimal_loss(), t.global_loss(w), 1e-12);
}

TEST(LinearTask, SmoothnessAndConvexityAreHessianExtremes) {
  const Task t = Task::generate(spec_of(TaskKind::kLinear));
  double hi = 0, lo = std::numeric_limits<double>::infinity();
  for (int k = 0; k < t.users(); ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.user_hessian(k, Eigen::VectorXd::Zero(t.dim())));
    hi = std::max(hi, es.eigenvalues().maxCoeff());
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  EXPECT_NEAR(t.rho_s(), hi, 1e-10 * hi);
  EXPECT_NEAR(t.rho_c(), lo, 1e-10 * hi);
}

TEST(HeterogeneityGap, VanishesForIdenticalLargeDatasets) {
  TaskSpec s = spec_of(TaskKind::kLinear);
  s.heterogeneity = 0.0;
  s.samples_per_user = {20000};
  EXPECT_LT(Task::generate(s).heterogeneity_gap(), 1e-3);
}

TEST(HeterogeneityGap, PositiveForShiftedUsers) {
  TaskSpec s = spec_of(TaskKind::kLinear);
  s.heterogeneity = 3.0;
  EXPECT_GT(Task::generate(s).heterogeneity_gap(), 1e-2);
  s.kind = TaskKind::kLogistic;
  EXPECT_GT(Task::generate(s).heterogeneity_gap(), 0.0);
}

TEST(TaskSpec, WeightsFollowSampleCounts) {
  TaskSpec s = spec_of(TaskKind::kLinear);
  s.samples_per_user = {100, 200, 300, 400};
  const Task t = Task::generate(s);
  EXPECT_DOUBLE_EQ(t.weights()[0], 0.1);
  EXPECT_DOUBLE_EQ(t.weights()[3], 0.4);
  s.samples_per_user = {100, 200};
  EXPECT_THROW(Task::generate(s), ConfigError);
  s.samples_per_user = {100};
  s.regularization = 0.0;
  EXPECT_THROW(Task::generate(s), ConfigError);
}

TEST(TaskSpec, GenerationIsDeterministic) {
  const Task a = Task::generate(spec_of(TaskKind::kLogistic));
  const Task b = Task::generate(spec_of(TaskKind::kLogistic));
  EXPECT_EQ(a.data(2).x, b.data(2).x);
  EXPECT_EQ(a.optimum(), b.optimum());
}

}  // namespace
}  // namespace jopeq
