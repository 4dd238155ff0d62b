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

#include "jopeq/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "jopeq/errors.hpp"
#include "jopeq/random.hpp"

namespace jopeq {
namespace {

// Upper triangle of the pooled distance matrix, row-major.
class PackedDistances {
 public:
  PackedDistances(const Eigen::MatrixXd& pooled, Execution exec)
      : n_(static_cast<std::size_t>(pooled.rows())) {
    offsets_.resize(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + (n_ - 1 - i);
    d_.resize(offsets_[n_]);
    const auto rows = static_cast<std::int64_t>(n_);
    auto fill = [&](std::int64_t i) {
      float* row = d_.data() + offsets_[static_cast<std::size_t>(i)];
      for (std::int64_t j = i + 1; j < rows; ++j) {
        row[j - i - 1] = static_cast<float>((pooled.row(i) - pooled.row(j)).norm());
      }
    };
    if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 64)
      for (std::int64_t i = 0; i < rows; ++i) fill(i);
    } else {
      for (std::int64_t i = 0; i < rows; ++i) fill(i);
    }
    row_sums_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      const float* row = d_.data() + offsets_[i];
      for (std::size_t k = 0; k < n_ - 1 - i; ++k) s += row[k];
      row_sums_[i] = s;
    }
  }

  // Statistic for group labels x (1 = first sample, n1 of them).
  double statistic(const std::vector<float>& x, std::size_t n1) const {
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      const float* row = d_.data() + offsets_[i];
      const float* xs = x.data() + i + 1;
      const std::size_t len = n_ - 1 - i;
      double rx = 0.0;
      for (std::size_t k = 0; k < len; ++k) rx += static_cast<double>(row[k] * xs[k]);
      const double ry = row_sums_[i] - rx;
      if (x[i] != 0.0f) {
        saa += rx;
        sab += ry;
      } else {
        sbb += ry;
        sab += rx;
      }
    }
    const double n = static_cast<double>(n1);
    const double m = static_cast<double>(n_ - n1);
    return n * m / (n + m) * (2.0 * sab / (n * m) - 2.0 * saa / (n * n) - 2.0 * sbb / (m * m));
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> offsets_;
  std::vector<float> d_;
  std::vector<double> row_sums_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(8);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> TestReport::to_record() const {
  return {{"name", name},
          {"statistic", fmt(statistic)},
          {"critical_value", fmt(critical_value)},
          {"sample_size", std::to_string(sample_size)},
          {"pass", pass ? "true" : "false"}};
}

std::string TestReport::to_text() const {
  std::ostringstream os;
  os << (pass ? "PASS " : "FAIL ") << name << ": statistic=" << fmt(statistic)
     << " critical=" << fmt(critical_value) << " n=" << sample_size;
  return os.str();
}

double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ConfigError("KS statistic needs samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

TestReport ks_test(std::span<const double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.size() < 1000) throw ConfigError("KS test needs at least 1000 samples");
  TestReport r;
  r.name = "ks";
  r.sample_size = samples.size();
  r.statistic = ks_statistic(samples, cdf);
  r.critical_value = kKsCritical01 / std::sqrt(static_cast<double>(samples.size()));
  r.pass = r.statistic < r.critical_value;
  return r;
}

TestReport correlation_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw ConfigError("correlation needs matched samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  TestReport r;
  r.name = "correlation";
  r.sample_size = x.size();
  r.statistic = (sxx > 0.0 && syy > 0.0) ? std::abs(sxy / std::sqrt(sxx * syy)) : 0.0;
  r.critical_value = kCorrelationCritical01 / std::sqrt(n);
  r.pass = r.statistic < r.critical_value;
  return r;
}

double energy_statistic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols() || a.rows() == 0 || b.rows() == 0) {
    throw ConfigError("energy statistic needs non-empty samples of equal dimension");
  }
  auto mean_dist = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < q.rows(); ++j) row += (p.row(i) - q.row(j)).norm();
      s += row;
    }
    return s / (static_cast<double>(p.rows()) * static_cast<double>(q.rows()));
  };
  const double n = static_cast<double>(a.rows());
  const double m = static_cast<double>(b.rows());
  return n * m / (n + m) * (2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b));
}

TestReport energy_distance_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                const EnergyOptions& options) {
  if (options.permutations < 100) throw ConfigError("energy test needs at least 100 permutations");
  TestReport r;
  r.name = "energy_distance";
  r.sample_size = static_cast<std::size_t>(a.rows() + b.rows());
  r.statistic = energy_statistic(a, b);

  Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
  pooled << a, b;
  const PackedDistances dist(pooled, options.exec);
  const auto n1 = static_cast<std::size_t>(a.rows());
  const std::size_t total = static_cast<std::size_t>(pooled.rows());
  std::vector<double> stats(static_cast<std::size_t>(options.permutations));
  auto one = [&](int p) {
    std::vector<std::uint32_t> order(total);
    std::iota(order.begin(), order.end(), 0u);
    CounterStream stream(options.seed, StreamDomain::kPermutation, static_cast<std::uint32_t>(p));
    std::shuffle(order.begin(), order.end(), stream);
    std::vector<float> labels(total, 0.0f);
    for (std::size_t k = 0; k < n1; ++k) labels[order[k]] = 1.0f;
    stats[static_cast<std::size_t>(p)] = dist.statistic(labels, n1);
  };
  if (options.exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int p = 0; p < options.permutations; ++p) one(p);
  } else {
    for (int p = 0; p < options.permutations; ++p) one(p);
  }
  std::sort(stats.begin(), stats.end());
  const auto q = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(stats.size()))) - 1;
  r.critical_value = stats[q];
  r.pass = r.statistic < r.critical_value;
  return r;
}

double laplace_cdf(double x, double scale) {
  return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

double uniform_cdf(double x, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  return (x - lo) / (hi - lo);
}

}  // namespace jopeq
