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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jopeq/errors.hpp"
#include "json.hpp"

namespace jopeq {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string error_class(const std::exception& e) {
  if (dynamic_cast<const MechanismInfeasible*>(&e)) return "infeasible";
  if (dynamic_cast<const InfeasibleParameters*>(&e)) return "infeasible";
  if (dynamic_cast<const DivergenceError*>(&e)) return "diverged";
  return "error";
}

}  // namespace

SnrPoint measure_snr(const UplinkSpec& spec, const std::vector<std::vector<ModelUpdate>>& updates,
                     std::uint64_t seed) {
  SnrPoint p;
  p.lattice_dim = spec.lattice_dimension;
  p.rate_bits = spec.rate_bits;
  p.epsilon = spec.epsilon;
  p.baseline = spec.baseline;
  try {
    const Uplink up(spec);
    p.gamma = up.has_lattice() ? up.gamma() : 0.0;
    std::vector<std::vector<double>> h, h_hat;
    for (const auto& round : updates) {
      for (const auto& u : round) {
        const auto tx = up.transmit(u, user_keys(seed, static_cast<int>(u.user),
                                                 static_cast<int>(u.round)),
                                    Execution::kSerial);
        h.push_back(u.h);
        h_hat.push_back(tx.h_hat);
        p.overloads += tx.overloads;
        p.subvectors += subvector_count(u.h.size(), spec.lattice_dimension);
      }
    }
    p.snr_db = snr_db(h, h_hat);
  } catch (const std::exception& e) {
    p.status = error_class(e);
    p.snr_db = std::nan("");
  }
  return p;
}

std::vector<SnrPoint> snr_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  FlConfig plain = cfg.fl;
  plain.rounds = cfg.snr_rounds;
  const Task task = Task::generate(plain.task);
  const auto updates = plain_updates(plain, task);

  std::vector<UplinkSpec> specs;
  for (int l : cfg.lattice_dims) {
    for (double e : cfg.epsilons) {
      for (int r : cfg.rates) {
        for (Baseline b : cfg.baselines) specs.push_back(cfg.uplink_for(b, l, r, e));
      }
    }
  }
  std::vector<SnrPoint> out(specs.size());
  const auto n = static_cast<std::int64_t>(specs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = measure_snr(specs[static_cast<std::size_t>(i)], updates, cfg.fl.seed);
  }
  return out;
}

std::vector<LearningCurve> learning_curves(const ExperimentConfig& cfg) {
  cfg.validate();
  const Task task = Task::generate(cfg.fl.task);
  std::vector<LearningCurve> out(cfg.baselines.size());
  const auto n = static_cast<std::int64_t>(cfg.baselines.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& c = out[static_cast<std::size_t>(i)];
    c.baseline = cfg.baselines[static_cast<std::size_t>(i)];
    FlConfig f = cfg.fl;
    f.exec = Execution::kSerial;
    f.uplink = cfg.uplink_for(c.baseline, f.uplink.lattice_dimension, f.uplink.rate_bits,
                              f.uplink.epsilon);
    try {
      const Uplink up(f.uplink);
      c.result = run_experiment(f, task, up);
    } catch (const std::exception& e) {
      c.status = error_class(e);
    }
  }
  return out;
}

std::string snr_csv(const std::vector<SnrPoint>& points) {
  std::ostringstream o;
  o << kCsvSchemaLine << " snr\n";
  o << "lattice_dim,rate_bits,epsilon,baseline,gamma,snr_db,overloads,subvectors,status\n";
  for (const auto& p : points) {
    o << p.lattice_dim << ',' << p.rate_bits << ',' << num(p.epsilon) << ','
      << to_string(p.baseline) << ',' << num(p.gamma) << ',' << num(p.snr_db) << ','
      << p.overloads << ',' << p.subvectors << ',' << p.status << '\n';
  }
  return o.str();
}

std::string learning_curve_csv(const std::vector<LearningCurve>& curves) {
  std::ostringstream o;
  o << kCsvSchemaLine << " learning_curve\n";
  o << "round,iteration,baseline,loss_gap,accuracy,snr_db,weights_distortion,"
       "distortion_bound,convergence_bound,overloads\n";
  for (const auto& c : curves) {
    for (const auto& m : c.result.metrics) {
      o << m.round << ',' << m.iteration << ',' << to_string(c.baseline) << ','
        << num(m.loss_gap) << ',' << num(m.accuracy) << ',' << num(m.snr_db) << ','
        << num(m.weights_distortion) << ',' << num(m.distortion_bound) << ','
        << num(m.convergence_bound) << ',' << m.overloads << '\n';
    }
  }
  return o.str();
}

std::string summary_json(const ExperimentConfig& cfg, const std::vector<SnrPoint>& points,
                         const std::vector<LearningCurve>& curves) {
  nlohmann::ordered_json j;
  j["schema"] = "jopeq-summary v1";
  nlohmann::ordered_json task;
  task["kind"] = to_string(cfg.fl.task.kind);
  task["dim"] = cfg.fl.task.model_dim;
  task["users"] = cfg.fl.task.users;
  task["seed"] = cfg.fl.task.seed;
  j["task"] = task;
  nlohmann::ordered_json fl;
  fl["rounds"] = cfg.fl.rounds;
  fl["local_steps"] = cfg.fl.local_steps;
  fl["schedule"] = cfg.fl.schedule == StepSchedule::kFixed ? "fixed" : "decaying";
  fl["eta"] = cfg.fl.eta;
  fl["seed"] = cfg.fl.seed;
  j["fl"] = fl;
  j["uplink"] = cfg.fl.uplink.to_record();
  std::size_t failed = 0;
  std::uint64_t overloads = 0;
  for (const auto& p : points) {
    failed += p.status != "ok";
    overloads += p.overloads;
  }
  j["snr_points"] = points.size();
  j["snr_points_failed"] = failed;
  j["snr_overloads"] = overloads;
  nlohmann::ordered_json lc = nlohmann::ordered_json::array();
  for (const auto& c : curves) {
    nlohmann::ordered_json e;
    e["baseline"] = to_string(c.baseline);
    e["status"] = c.status;
    if (!c.result.metrics.empty()) {
      e["final_loss_gap"] = c.result.metrics.back().loss_gap;
      e["final_accuracy"] = c.result.metrics.back().accuracy;
    }
    lc.push_back(e);
  }
  j["learning_curves"] = lc;
  return j.dump(2) + "\n";
}

SweepFiles run_sweep(const ExperimentConfig& cfg) {
  SweepFiles out;
  const auto points = snr_sweep(cfg);
  std::vector<LearningCurve> curves;
  if (cfg.learning_curves) curves = learning_curves(cfg);
  out.files.emplace_back("snr.csv", snr_csv(points));
  if (cfg.learning_curves) out.files.emplace_back("learning_curve.csv", learning_curve_csv(curves));
  out.files.emplace_back("summary.json", summary_json(cfg, points, curves));
  return out;
}

void write_files(const SweepFiles& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : out.files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << body;
    if (!f) throw ConfigError("write failed for " + path.string());
  }
}

}  // namespace jopeq
