// Copyright 2026 The CDM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs every desk criterion and prints one PASS/FAIL line per criterion.
// A criterion fails if its checks fail or it overruns its time budget.

#include <chrono>
#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "cdm/desk/desk.hpp"

int main(int argc, char** argv) {
  cdm::desk::DeskOptions options;
  std::vector<int> only;
  CLI::App app{"Desk acceptance suite"};
  app.add_option("--seed", options.seed, "Base seed")->capture_default_str();
  app.add_option("--jobs", options.jobs, "Worker threads")->capture_default_str();
  app.add_option("--criteria", only, "Criterion numbers to run (default all)");
  CLI11_PARSE(app, argc, argv);
  if (only.empty()) only = cdm::desk::criteria_ids();

  int failures = 0;
  for (int id : only) {
    const auto t0 = std::chrono::steady_clock::now();
    cdm::desk::CriterionResult r;
    std::string error;
    try {
      r = cdm::desk::run_criterion(id, options);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double budget = cdm::desk::criterion_budget(id);
    const bool in_time = secs < budget;
    const bool pass = error.empty() && r.passed && in_time;
    failures += !pass;
    std::printf("criterion %d %-34s %s  %7.2fs / %.0fs", id, cdm::desk::criterion_title(id).c_str(),
                pass ? "PASS" : "FAIL", secs, budget);
    if (!error.empty()) {
      std::printf("  error: %s", error.c_str());
    } else if (!in_time) {
      std::printf("  over time budget");
    }
    if (!r.detail.empty()) std::printf("  %s", r.detail.c_str());
    std::printf("\n");
    for (const auto& m : r.metrics) std::printf("    %-40s %.6g\n", m.name.c_str(), m.value);
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", only.size(), failures);
  return failures == 0 ? 0 : 1;
}
