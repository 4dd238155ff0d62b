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

#include "jopeq/config.hpp"

#include <gtest/gtest.h>

#include "jopeq/errors.hpp"

namespace jopeq {
namespace {

TEST(KeyValueConfig, ParsesCommentsListsAndOverrides) {
  const auto kv = KeyValueConfig::parse(
      "# header\n"
      "fl.rounds = 50   # trailing\n"
      "\n"
      "sweep.rates = 1, 2,3\n"
      "sweep.epsilons=3.5,4\n"
      "fl.rounds = 60\n"
      "sweep.learning_curves = no\n");
  EXPECT_EQ(kv.get_int("fl.rounds", 0), 60);
  EXPECT_EQ(kv.get_ints("sweep.rates", {}), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(kv.get_doubles("sweep.epsilons", {}), (std::vector<double>{3.5, 4.0}));
  EXPECT_FALSE(kv.get_bool("sweep.learning_curves", true));
  EXPECT_EQ(kv.get_int("missing", 7), 7);
}

TEST(KeyValueConfig, MalformedLinesAndValuesRaise) {
  EXPECT_THROW(KeyValueConfig::parse("just words\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse(" = 3\n"), ConfigError);
  const auto kv = KeyValueConfig::parse("a = 3x\nb = maybe\nc = 1,,2\n");
  EXPECT_THROW(kv.get_int("a", 0), ConfigError);
  EXPECT_THROW(kv.get_double("a", 0), ConfigError);
  EXPECT_THROW(kv.get_bool("b", false), ConfigError);
  EXPECT_THROW(kv.get_ints("c", {}), ConfigError);
  EXPECT_THROW(KeyValueConfig::load("/nonexistent/jopeq.cfg"), ConfigError);
}

TEST(KeyValueConfig, EnvironmentOverridesFile) {
  auto kv = KeyValueConfig::parse("fl.rounds = 50\n");
  const char* env[] = {"PATH=/bin", "JOPEQ_FL__ROUNDS=75", "JOPEQ_CODEC__RATE=3", nullptr};
  kv.apply_environment(env);
  EXPECT_EQ(kv.get_int("fl.rounds", 0), 75);
  EXPECT_EQ(kv.get_int("codec.rate", 0), 3);
  EXPECT_FALSE(kv.has("path"));
}

TEST(KeyValueConfig, UnusedKeysListed) {
  const auto kv = KeyValueConfig::parse("a = 1\nb = 2\n");
  kv.get_int("a", 0);
  EXPECT_EQ(kv.unused_keys(), std::vector<std::string>{"b"});
}

TEST(ExperimentConfig, DefaultsAndMapping) {
  const auto c = ExperimentConfig::from(KeyValueConfig::parse(
      "task.kind = logistic\ntask.users = 20\nfl.schedule = decaying\n"
      "codec.rate = 2\ncodec.epsilon = 3\nsweep.baselines = jopeq, separate\n"
      "output.dir = res\n"));
  EXPECT_EQ(c.fl.task.kind, TaskKind::kLogistic);
  EXPECT_EQ(c.fl.task.users, 20);
  EXPECT_EQ(c.fl.schedule, StepSchedule::kDecaying);
  EXPECT_EQ(c.fl.uplink.rate_bits, 2);
  EXPECT_DOUBLE_EQ(c.fl.uplink.epsilon, 3.0);
  EXPECT_EQ(c.baselines, (std::vector<Baseline>{Baseline::kJopeq, Baseline::kSeparate}));
  EXPECT_EQ(c.out_dir, "res");
  EXPECT_EQ(c.rates.size(), 8u);
}

TEST(ExperimentConfig, RejectsUnknownAndInvalid) {
  EXPECT_THROW(ExperimentConfig::from(KeyValueConfig::parse("fl.roundz = 3\n")), ConfigError);
  EXPECT_THROW(ExperimentConfig::from(KeyValueConfig::parse("fl.schedule = cosine\n")), ConfigError);
  EXPECT_THROW(ExperimentConfig::from(KeyValueConfig::parse("sweep.rates = 0\n")), ConfigError);
  EXPECT_THROW(ExperimentConfig::from(KeyValueConfig::parse("sweep.lattice_dims = 3\n")), ConfigError);
  EXPECT_THROW(ExperimentConfig::from(KeyValueConfig::parse("sweep.epsilons = -1\n")), ConfigError);
}

TEST(ExperimentConfig, AutoUplinkFollowsLatticeDimension) {
  const auto c = ExperimentConfig::from(KeyValueConfig::parse(""));
  const auto one = c.uplink_for(Baseline::kJopeq, 1, 3, 4.0);
  EXPECT_EQ(one.lattice_dimension, 1);
  EXPECT_EQ(one.family, LatticeFamily::kScalar);
  EXPECT_EQ(one.mechanism, MechanismKind::kLaplace);
  EXPECT_EQ(one.rate_bits, 3);
  const auto two = c.uplink_for(Baseline::kSeparate, 2, 5, 3.0);
  EXPECT_EQ(two.family, LatticeFamily::kHexagonal);
  EXPECT_EQ(two.mechanism, MechanismKind::kMultivariateT);
  EXPECT_EQ(two.baseline, Baseline::kSeparate);
}

}  // namespace
}  // namespace jopeq
