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

// Acceptance gate. Prints one PASS/FAIL line per criterion, with the check
// details and runtime. Exits 0 once every criterion has been evaluated;
// --strict turns any FAIL into a nonzero exit.

#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "jopeq/verify.hpp"

namespace {

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<jopeq::CheckResult()> run;
};

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::uint64_t seed = 20260101;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else {
      std::cerr << "usage: acceptance_test [--strict] [--seed N]\n";
      return 2;
    }
  }
  using namespace jopeq;
  const std::vector<Criterion> criteria = {
      {1, "SDQ distortion uniform and input-independent", 10,
       [&] { return with_retry([](std::uint64_t s) { return check_sdq_law(s, 100000); }, seed); }},
      {2, "scalar JoPEQ distortion Laplace, zero overloads", 30,
       [&] { return with_retry([](std::uint64_t s) { return check_laplace_law(s, 100000); }, seed); }},
      {3, "hexagonal JoPEQ distortion multivariate t", 120,
       [&] { return with_retry([](std::uint64_t s) { return check_t_law(s, 10000); }, seed); }},
      {4, "privacy-quantization threshold", 1, [] { return check_threshold(); }},
      {5, "weights distortion bound", 120, [&] { return check_distortion_bound(seed, 20, 200); }},
      {6, "convergence bound and 1/t rate", 300, [&] { return check_convergence_bound(seed, 10, 10000); }},
      {7, "SNR versus rate shape", 600, [&] { return check_snr_shape(seed, 1000); }},
      {8, "logistic FL loss-gap ordering at R = 1", 600,
       [&] { return check_learning_order(seed, 10, 300); }},
      {9, "byte-identical reruns", 600, [&] { return check_determinism(seed); }},
  };

  int failed = 0;
  std::vector<std::string> summary;
  for (const auto& c : criteria) {
    CheckResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.name = c.title;
      r.pass = false;
      r.notes.push_back(std::string("aborted: ") + e.what());
    }
    const bool in_budget = r.seconds <= c.budget_seconds;
    if (!in_budget) r.notes.push_back("runtime over budget");
    const bool pass = r.pass && in_budget;
    if (!pass) ++failed;
    std::cout << r.to_text();
    char line[256];
    std::snprintf(line, sizeof line, "%s criterion %d: %s (%.2f s, budget %.0f s)",
                  pass ? "PASS" : "FAIL", c.id, c.title, r.seconds, c.budget_seconds);
    std::cout << line << "\n\n" << std::flush;
    summary.emplace_back(line);
  }
  std::cout << "== summary ==\n";
  for (const auto& s : summary) std::cout << s << '\n';
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed\n";
  return strict && failed > 0 ? 1 : 0;
}
