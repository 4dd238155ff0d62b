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

// Command-line front end: verify, sweep, codec.

#include <omp.h>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jopeq/codec.hpp"
#include "jopeq/config.hpp"
#include "jopeq/errors.hpp"
#include "jopeq/flsim.hpp"
#include "jopeq/sweep.hpp"
#include "jopeq/uplink.hpp"
#include "jopeq/verify.hpp"

extern char** environ;

namespace {

struct GlobalFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

jopeq::ExperimentConfig load_config(const GlobalFlags& g) {
  jopeq::KeyValueConfig kv;
  if (!g.config.empty()) kv = jopeq::KeyValueConfig::load(g.config);
  kv.apply_environment(environ);
  if (g.seed) kv.set("fl.seed", std::to_string(*g.seed));
  if (!g.out.empty()) kv.set("output.dir", g.out);
  if (g.jobs > 0) kv.set("run.jobs", std::to_string(g.jobs));
  return jopeq::ExperimentConfig::from(kv);
}

void apply_jobs(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

std::vector<double> read_vector(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw jopeq::ConfigError("cannot open " + path);
  std::vector<double> v;
  double x;
  while (f >> x) v.push_back(x);
  if (!f.eof()) throw jopeq::ConfigError("non-numeric token in " + path);
  return v;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw jopeq::ConfigError("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int cmd_verify(const GlobalFlags& g) {
  apply_jobs(g.jobs);
  jopeq::VerifyOptions opts;
  if (g.seed) opts.seed = *g.seed;
  const auto results = jopeq::run_verify_suite(opts, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed")
            << "\n";
  if (!g.out.empty()) {
    std::ostringstream body;
    for (const auto& r : results) body << r.to_text();
    jopeq::SweepFiles files;
    files.files.emplace_back("verify.txt", body.str());
    jopeq::write_files(files, g.out);
  }
  return failed == 0 ? 0 : 1;
}

int cmd_sweep(const GlobalFlags& g) {
  const auto cfg = load_config(g);
  apply_jobs(cfg.jobs);
  const auto files = jopeq::run_sweep(cfg);
  jopeq::write_files(files, cfg.out_dir);
  for (const auto& [name, body] : files.files) {
    std::cout << cfg.out_dir << "/" << name << " (" << body.size() << " bytes)\n";
  }
  return 0;
}

int cmd_codec(const GlobalFlags& g, const std::string& mode, const std::string& in,
              const std::string& out, std::uint32_t user, std::uint32_t round, std::size_t dim) {
  const auto cfg = load_config(g);
  apply_jobs(cfg.jobs);
  const jopeq::UplinkSpec& spec = cfg.fl.uplink;
  if (spec.baseline != jopeq::Baseline::kJopeq && spec.baseline != jopeq::Baseline::kSdqOnly) {
    throw jopeq::ConfigError("codec needs codec.baseline = jopeq or sdq");
  }
  const jopeq::Uplink up(spec);
  const jopeq::CodecKeys keys = jopeq::user_keys(cfg.fl.seed, static_cast<int>(user), static_cast<int>(round));
  if (mode == "encode") {
    jopeq::ModelUpdate u;
    u.h = read_vector(in);
    u.user = user;
    u.round = round;
    const auto enc = jopeq::encode(u, up.lattice(), up.sampler(), keys);
    const auto bytes = jopeq::serialize(enc);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw jopeq::ConfigError("cannot write " + out);
    std::cout << "encoded " << u.h.size() << " values into " << bytes.size() << " bytes, "
              << enc.overloads << " overloads\n";
    return 0;
  }
  const auto bytes = read_bytes(in);
  std::size_t d = dim;
  if (d == 0) {
    if (bytes.size() < 2) throw jopeq::CorruptPayload("payload shorter than its header");
    d = ((static_cast<std::size_t>(bytes[0]) << 8) | bytes[1]) *
        static_cast<std::size_t>(up.lattice().dimension());
  }
  const auto enc = jopeq::deserialize(bytes, d, up.lattice());
  const auto dec = jopeq::decode(enc, up.lattice(), keys.shared);
  std::ofstream f(out, std::ios::trunc);
  f.precision(17);
  for (double x : dec.h) f << x << "\n";
  if (!f) throw jopeq::ConfigError("cannot write " + out);
  std::cout << "decoded " << dec.h.size() << " values\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jopeq: joint privacy and quantization for federated updates"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "Key-value config file");
  app.add_option("--out", g.out, "Output directory (output file for codec)");
  app.add_option("--seed", g.seed, "Experiment seed");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

  auto* verify = app.add_subcommand("verify", "Run the invariant suite; nonzero exit on failure");
  auto* sweep = app.add_subcommand("sweep", "SNR-versus-rate and learning-curve CSVs");
  auto* codec = app.add_subcommand("codec", "Encode or decode one update");
  std::string mode, in, out;
  std::uint32_t user = 0, round = 0;
  std::size_t dim = 0;
  codec->add_option("mode", mode, "encode or decode")->required()->check(CLI::IsMember({"encode", "decode"}));
  codec->add_option("--in", in, "Input: whitespace-separated values or a payload")->required();
  codec->add_option("--output", out, "Output file")->required();
  codec->add_option("--user", user, "User index for the shared randomness");
  codec->add_option("--round", round, "Round index for the shared randomness");
  codec->add_option("--dim", dim, "Update length for decode (default M*L)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*verify) return cmd_verify(g);
    if (*sweep) return cmd_sweep(g);
    if (*codec) return cmd_codec(g, mode, in, out, user, round, dim);
  } catch (const jopeq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
