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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cdm::desk {

// Desk-scale reproduction of the property experiments on the bundled
// synthetic corpus. Every run is a pure function of the options.
struct DeskOptions {
  std::uint64_t seed = 7;
  std::size_t jobs = 1;
};

struct Metric {
  std::string name;
  double value = 0.0;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<Metric> metrics;
  std::string detail;  // one line, names the failing check if any
};

const std::vector<int>& criteria_ids();
std::string criterion_title(int id);
// Wall-clock budget in seconds.
double criterion_budget(int id);

// Throws ArgumentError for an unknown id.
CriterionResult run_criterion(int id, const DeskOptions& options);

// Deterministic JSON (no timings).
std::string results_json(const std::vector<CriterionResult>& results, const DeskOptions& options);
// Aligned pass/fail table; `seconds` may be empty.
std::string results_table(const std::vector<CriterionResult>& results,
                          const std::vector<double>& seconds);

}  // namespace cdm::desk
