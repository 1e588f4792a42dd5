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
#include <span>

#include "cdm/language_model.hpp"

namespace cdm::desk {

// Reference computations that share no code with the library routines
// they check.

struct Divergences {
  double kl_expert_amateur = 0.0;
  double kl_amateur_expert = 0.0;
  double symmetrized = 0.0;
};

// Lists every event explicitly (end marker within max_length tokens, or a
// length-max_length prefix), computes both sequence probabilities by the
// chain rule, and sums the divergences.
Divergences brute_force_divergences(const LanguageModel& expert, const LanguageModel& amateur,
                                    std::size_t max_length);

// O(n^2) ranks by counting, then the textbook Pearson formula.
double naive_spearman(std::span<const double> x, std::span<const double> y);

}  // namespace cdm::desk
