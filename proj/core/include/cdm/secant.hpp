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

#include "cdm/language_model.hpp"
#include "cdm/momentum.hpp"

namespace cdm {

// Linear (secant) surrogate of the oracle quality functional through the
// amateur and expert distributions:
//
//   E(p) = sum_s (log p_e(s) - log p_a(s)) p(s)
//
// The sum runs over a finite event space: every sequence that emits the end
// marker before `max_length` tokens, plus every length-`max_length` prefix
// (the truncation event). These events partition the probability space, so
// E(p_e) and -E(p_a) are KL divergences between the truncated laws.

struct EnumerationSpec {
  std::size_t max_length = 3;
  std::size_t budget = 2'000'000;  // maximum number of events
};

struct MonteCarloSpec {
  std::size_t samples = 1000;
  std::size_t max_length = 3;
  std::uint64_t seed = 0;
};

struct SecantEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // 0 for exact estimates
  std::size_t evaluations = 0;  // events enumerated or samples drawn
  bool exact = false;
};

// Number of events in the enumeration domain for a vocabulary of size V.
double enumeration_size(std::size_t vocab_size, std::size_t max_length);

// Throws EnumerationBudgetError (carrying the size estimate) when the domain
// exceeds spec.budget.
SecantEstimate secant_estimate_exact(const LanguageModel& p, const ContrastPair& pair,
                                     const EnumerationSpec& spec);

// Averages sequence momentum over samples from p; reports the standard
// error of the mean.
SecantEstimate secant_estimate_monte_carlo(const LanguageModel& p, const ContrastPair& pair,
                                           const MonteCarloSpec& spec);

}  // namespace cdm
