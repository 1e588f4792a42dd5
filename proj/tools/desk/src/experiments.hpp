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
#include <map>

namespace cdm::desk {

struct SeparationResult {
  double auc = 0.0;
  double p_value = 1.0;  // one-sided Welch, clean > degraded
  double mean_clean = 0.0;
  double mean_degraded = 0.0;
};

// Avg-pooled momentum of clean held-out documents against gamma = 1
// degraded samples, expert order 4 and amateur order 1.
SeparationResult discriminative_separation(std::uint64_t seed, std::size_t per_class, std::size_t jobs);

struct TransferResult {
  double cdm_auc = 0.0;                  // gamma = 1 negatives
  std::map<int, double> resample_auc;    // amateur order -> AUC, gamma = 0
};

// Trains discriminators on synthesized negatives and evaluates them on
// clean versus randomly swapped documents.
TransferResult negative_transfer(std::uint64_t seed, int cdm_amateur_order, std::size_t jobs);

}  // namespace cdm::desk
