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

#ifndef JOPEQ_CONFIG_HPP_
#define JOPEQ_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jopeq/flsim.hpp"
#include "jopeq/uplink.hpp"

namespace jopeq {

// Flat "key = value" text with dotted keys, '#' comments and
// comma-separated lists. Later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  // JOPEQ_FL__ROUNDS=50 sets fl.rounds: prefix stripped, lower-cased, "__"
  // becomes ".".
  void apply_environment(const char* const* envp);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& fallback) const;

  // Keys never read by a getter; typos show up here.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

struct ExperimentConfig {
  FlConfig fl;
  // Sweep axes. The SNR sweep covers the full product.
  std::vector<int> rates{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> epsilons{3.0, 3.5, 4.0};
  std::vector<int> lattice_dims{1};
  std::vector<Baseline> baselines{Baseline::kSdqOnly, Baseline::kPpnOnly, Baseline::kSeparate,
                                  Baseline::kJopeq};
  // Rounds of the plain trajectory whose updates feed the SNR sweep.
  int snr_rounds = 200;
  bool learning_curves = true;
  std::string out_dir = "out";
  int jobs = 0;

  static ExperimentConfig from(const KeyValueConfig& kv);
  void validate() const;

  // Uplink for one sweep point; the mechanism and lattice family follow the
  // lattice dimension unless fixed in the config.
  UplinkSpec uplink_for(Baseline baseline, int lattice_dim, int rate, double epsilon) const;

  std::string mechanism_setting = "auto";
  std::string family_setting = "auto";
};

}  // namespace jopeq

#endif  // JOPEQ_CONFIG_HPP_
