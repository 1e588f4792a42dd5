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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cdm/language_model.hpp"
#include "cdm/token_sequence.hpp"

namespace cdm {

// An (expert, amateur) pair over one shared vocabulary.
class ContrastPair {
 public:
  // Throws ConfigurationError when the vocabularies differ, or when both
  // handles report the same identity and `allow_identical` is false.
  ContrastPair(LanguageModelHandle expert, LanguageModelHandle amateur,
               bool allow_identical = false);

  const LanguageModel& expert() const { return *expert_; }
  const LanguageModel& amateur() const { return *amateur_; }
  const LanguageModelHandle& expert_handle() const { return expert_; }
  const LanguageModelHandle& amateur_handle() const { return amateur_; }
  const Vocabulary& vocabulary() const { return amateur_->vocabulary(); }
  bool fim_capable() const { return expert_->fim_capable() && amateur_->fim_capable(); }

 private:
  LanguageModelHandle expert_;
  LanguageModelHandle amateur_;
};

struct MomentumStep {
  std::size_t pos = 0;
  TokenId token = 0;
  double lp_expert = 0.0;
  double lp_amateur = 0.0;
  double momentum = 0.0;  // lp_expert - lp_amateur
};

// Step-wise contrastive momentum of one sequence; the last step predicts
// the end marker.
struct MomentumTrace {
  std::string id;
  std::vector<MomentumStep> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  double sum() const;
  std::vector<double> values() const;
};

// Throws ArgumentError on an empty sequence and ConfigurationError if the
// sequence was encoded with a different vocabulary size.
MomentumTrace momentum_trace(const ContrastPair& pair, const TokenSequence& s,
                             std::string id = {});

// Summary statistics shared by the discriminator features and the trained
// pooler.
struct TraceSummary {
  static constexpr std::size_t kSize = 7;

  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // population
  double final = 0.0;
  double fraction_negative = 0.0;
  double length = 0.0;

  std::array<double, kSize> as_array() const {
    return {mean, min, max, stddev, final, fraction_negative, length};
  }
  static const std::array<const char*, kSize>& names();
};

// Throws ArgumentError on an empty trace.
TraceSummary summarize(const MomentumTrace& trace);

// Mean of `values` via compensated summation, clamped into [min, max].
double stable_mean(std::span<const double> values);

}  // namespace cdm
