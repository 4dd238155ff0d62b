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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "jopeq/errors.hpp"

namespace jopeq {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    // Empty items are kept so that "1,,2" fails to parse.
    out.push_back(trim(item));
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("bad value for " + key + ": '" + text + "'");
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.set(key, trim(std::string_view(t).substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void KeyValueConfig::apply_environment(const char* const* envp) {
  if (envp == nullptr) return;
  constexpr std::string_view prefix = "JOPEQ_";
  for (; *envp != nullptr; ++envp) {
    const std::string_view entry(*envp);
    if (entry.substr(0, prefix.size()) != prefix) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    std::string key;
    const std::string_view raw = entry.substr(prefix.size(), eq - prefix.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '_' && i + 1 < raw.size() && raw[i + 1] == '_') {
        key += '.';
        ++i;
      } else {
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
      }
    }
    if (!key.empty()) set(key, std::string(entry.substr(eq + 1)));
  }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

const std::string* KeyValueConfig::find(const std::string& key) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto* v = find(key);
  return v ? parse_number<int>(key, *v) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto* v = find(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto* v = find(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + *v + "'");
}

std::vector<int> KeyValueConfig::get_ints(const std::string& key,
                                          const std::vector<int>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<int> out;
  for (const auto& s : split_list(*v)) out.push_back(parse_number<int>(key, s));
  return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                const std::vector<double>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& s : split_list(*v)) out.push_back(parse_number<double>(key, s));
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key,
                                                     const std::vector<std::string>& fallback) const {
  const auto* v = find(key);
  return v ? split_list(*v) : fallback;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
  ExperimentConfig c;
  TaskSpec& t = c.fl.task;
  t.kind = task_kind_from_string(kv.get_string("task.kind", to_string(t.kind)));
  t.model_dim = kv.get_int("task.dim", t.model_dim);
  t.users = kv.get_int("task.users", t.users);
  t.samples_per_user = kv.get_ints("task.samples", t.samples_per_user);
  t.heterogeneity = kv.get_double("task.heterogeneity", t.heterogeneity);
  t.regularization = kv.get_double("task.regularization", t.regularization);
  t.noise_std = kv.get_double("task.noise_std", t.noise_std);
  t.seed = kv.get_u64("task.seed", t.seed);

  FlConfig& f = c.fl;
  f.rounds = kv.get_int("fl.rounds", f.rounds);
  f.local_steps = kv.get_int("fl.local_steps", f.local_steps);
  const std::string sched = kv.get_string("fl.schedule", "fixed");
  if (sched == "fixed") {
    f.schedule = StepSchedule::kFixed;
  } else if (sched == "decaying") {
    f.schedule = StepSchedule::kDecaying;
  } else {
    throw ConfigError("fl.schedule must be fixed or decaying");
  }
  f.eta = kv.get_double("fl.eta", f.eta);
  f.log_every = kv.get_int("fl.log_every", f.log_every);
  f.seed = kv.get_u64("fl.seed", f.seed);
  f.divergence_threshold = kv.get_double("fl.divergence_threshold", f.divergence_threshold);

  c.mechanism_setting = kv.get_string("codec.mechanism", c.mechanism_setting);
  c.family_setting = kv.get_string("codec.family", c.family_setting);
  UplinkSpec& u = f.uplink;
  u.baseline = baseline_from_string(kv.get_string("codec.baseline", to_string(u.baseline)));
  u.lattice_dimension = kv.get_int("codec.lattice_dim", u.lattice_dimension);
  u.rate_bits = kv.get_int("codec.rate", u.rate_bits);
  u.gamma = kv.get_double("codec.gamma", u.gamma);
  u.epsilon = kv.get_double("codec.epsilon", u.epsilon);
  u.nu = kv.get_double("codec.nu", u.nu);
  const std::string expo = kv.get_string("codec.t_exponent", "as_printed");
  if (expo == "as_printed") {
    u.exponent = TExponent::kAsPrinted;
  } else if (expo == "half") {
    u.exponent = TExponent::kHalf;
  } else {
    throw ConfigError("codec.t_exponent must be as_printed or half");
  }
  u.sampler.allow_degenerate = kv.get_bool("codec.allow_degenerate", false);
  u.sampler.grid_points_1d = kv.get_int("sampler.grid_points_1d", u.sampler.grid_points_1d);
  u.sampler.grid_points_2d = kv.get_int("sampler.grid_points_2d", u.sampler.grid_points_2d);
  u.sampler.support_sigmas = kv.get_double("sampler.support_sigmas", u.sampler.support_sigmas);
  u.sampler.refinement_iterations =
      kv.get_int("sampler.refinement_iterations", u.sampler.refinement_iterations);
  {
    const UplinkSpec resolved = c.uplink_for(u.baseline, u.lattice_dimension, u.rate_bits, u.epsilon);
    u.mechanism = resolved.mechanism;
    u.family = resolved.family;
  }

  c.rates = kv.get_ints("sweep.rates", c.rates);
  c.epsilons = kv.get_doubles("sweep.epsilons", c.epsilons);
  c.lattice_dims = kv.get_ints("sweep.lattice_dims", c.lattice_dims);
  std::vector<std::string> names;
  for (Baseline b : c.baselines) names.push_back(to_string(b));
  names = kv.get_strings("sweep.baselines", names);
  c.baselines.clear();
  for (const auto& n : names) c.baselines.push_back(baseline_from_string(n));
  c.snr_rounds = kv.get_int("sweep.snr_rounds", c.snr_rounds);
  c.learning_curves = kv.get_bool("sweep.learning_curves", c.learning_curves);
  c.out_dir = kv.get_string("output.dir", c.out_dir);
  c.jobs = kv.get_int("run.jobs", c.jobs);

  const auto unused = kv.unused_keys();
  if (!unused.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  fl.validate();
  if (rates.empty() || epsilons.empty() || lattice_dims.empty() || baselines.empty()) {
    throw ConfigError("sweep axes must be non-empty");
  }
  for (int r : rates) {
    if (r < 1 || r > 12) throw ConfigError("sweep rates must lie in 1..12");
  }
  for (double e : epsilons) {
    if (!(e > 0.0)) throw ConfigError("sweep epsilons must be positive");
  }
  for (int l : lattice_dims) {
    if (l != 1 && l != 2) throw ConfigError("sweep lattice dimensions must be 1 or 2");
  }
  if (snr_rounds < 1) throw ConfigError("sweep.snr_rounds must be positive");
  if (jobs < 0) throw ConfigError("jobs must be nonnegative");
  if (mechanism_setting != "auto" && mechanism_setting != "laplace" && mechanism_setting != "t") {
    throw ConfigError("codec.mechanism must be auto, laplace or t");
  }
  if (family_setting != "auto") lattice_family_from_string(family_setting);
}

UplinkSpec ExperimentConfig::uplink_for(Baseline baseline, int lattice_dim, int rate,
                                        double epsilon) const {
  UplinkSpec u = fl.uplink;
  u.baseline = baseline;
  u.lattice_dimension = lattice_dim;
  u.rate_bits = rate;
  u.epsilon = epsilon;
  if (mechanism_setting == "auto") {
    u.mechanism = lattice_dim == 1 ? MechanismKind::kLaplace : MechanismKind::kMultivariateT;
  } else {
    u.mechanism = mechanism_kind_from_string(mechanism_setting);
  }
  if (lattice_dim == 1) {
    u.family = LatticeFamily::kScalar;
  } else {
    u.family = family_setting == "auto" ? LatticeFamily::kHexagonal
                                        : lattice_family_from_string(family_setting);
  }
  return u;
}

}  // namespace jopeq
