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

#include "jopeq/sweep.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "jopeq/config.hpp"

namespace jopeq {
namespace {

ExperimentConfig small_sweep() {
  ExperimentConfig c;
  c.fl.rounds = 10;
  c.fl.task.users = 5;
  c.fl.task.model_dim = 6;
  c.snr_rounds = 20;
  c.rates = {1, 2, 3, 4, 5, 6};
  c.epsilons = {3.0, 4.0};
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(Sweep, CsvSchemaAndHeaders) {
  auto c = small_sweep();
  c.rates = {2};
  const auto files = run_sweep(c);
  ASSERT_EQ(files.files.size(), 3u);
  EXPECT_EQ(files.files[0].first, "snr.csv");
  const auto snr = lines(files.files[0].second);
  EXPECT_EQ(snr[0].rfind(kCsvSchemaLine, 0), 0u);
  EXPECT_EQ(snr[1], "lattice_dim,rate_bits,epsilon,baseline,gamma,snr_db,overloads,subvectors,status");
  EXPECT_EQ(snr.size(), 2u + 2 * 4);
  const auto lc = lines(files.files[1].second);
  EXPECT_EQ(lc[1],
            "round,iteration,baseline,loss_gap,accuracy,snr_db,weights_distortion,distortion_bound,"
            "convergence_bound,overloads");
  EXPECT_EQ(lc.size(), 2u + 4 * 10);
  EXPECT_EQ(files.files[2].first, "summary.json");
}

TEST(Sweep, DeterministicAndWrittenAsGiven) {
  const auto c = small_sweep();
  const auto a = run_sweep(c);
  const auto b = run_sweep(c);
  EXPECT_EQ(a.files, b.files);
  const auto dir = std::filesystem::temp_directory_path() / "jopeq_sweep_test";
  std::filesystem::remove_all(dir);
  write_files(a, dir.string());
  std::ifstream f(dir / "snr.csv", std::ios::binary);
  std::stringstream got;
  got << f.rdbuf();
  EXPECT_EQ(got.str(), a.files[0].second);
  std::filesystem::remove_all(dir);
}

TEST(Sweep, SnrNonDecreasingInRateForStandardBaselines) {
  auto c = small_sweep();
  c.baselines = {Baseline::kSdqOnly, Baseline::kPpnOnly, Baseline::kSeparate};
  c.snr_rounds = 50;
  const auto points = snr_sweep(c);
  ASSERT_EQ(points.size(), 6u * 2 * 3);
  for (Baseline b : c.baselines) {
    for (double eps : c.epsilons) {
      double prev = -1e300;
      for (const auto& p : points) {
        if (p.baseline != b || p.epsilon != eps) continue;
        ASSERT_EQ(p.status, "ok");
        // Equal streams make PPN-only identical across rates up to rounding.
        EXPECT_GE(p.snr_db, prev - 1e-9) << to_string(b) << " eps " << eps << " R " << p.rate_bits;
        prev = p.snr_db;
      }
    }
  }
}

TEST(Sweep, InfeasiblePointIsReportedNotThrown) {
  auto c = small_sweep();
  c.rates = {1};
  // (2 R eps + 1) / 2^R = 6.5 exceeds sqrt 24: no exact PPN exists.
  c.epsilons = {6.0};
  c.baselines = {Baseline::kJopeq};
  const auto points = snr_sweep(c);
  ASSERT_EQ(points.size(), 1u);
  EXPECT_NE(points[0].status, "ok");
}

}  // namespace
}  // namespace jopeq
