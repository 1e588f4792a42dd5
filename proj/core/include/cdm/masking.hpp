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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cdm/random.hpp"
#include "cdm/token_sequence.hpp"

namespace cdm {

inline constexpr std::size_t kMaxSegmentLength = 20;
inline constexpr std::size_t kMaxEdits = 4;
inline constexpr int kOverlapAttempts = 50;

enum class SpanKind { kSegment, kUtterance, kExternal };

struct MaskedSpan {
  Span span;
  SpanKind kind = SpanKind::kSegment;
};

// Spans chosen for regeneration: sorted, non-overlapping, within bounds.
struct MaskSpec {
  std::vector<MaskedSpan> spans;
  std::size_t requested_edits = 1;

  void validate(std::size_t sequence_length) const;
};

// A span-selection strategy. External selectors (for example a parser-guided
// one) register under their own name.
using SpanSelector = std::function<MaskSpec(const TokenSequence&, Rng&)>;

class StrategyRegistry {
 public:
  // Holds segment-single, utterance-single, mixed-single and mixed-multi.
  static StrategyRegistry with_builtins();

  void add(std::string name, SpanSelector selector);
  bool contains(const std::string& name) const { return selectors_.count(name) > 0; }
  std::vector<std::string> names() const;

  // Throws StrategyError for an unknown name.
  MaskSpec select(const std::string& name, const TokenSequence& s, Rng& rng) const;

 private:
  std::map<std::string, SpanSelector> selectors_;
};

// Built-in strategies:
//   segment-single    one segment, length uniform in 1..min(20, len)
//   utterance-single  one full turn; requires turn boundaries
//   mixed-single      one edit, utterance or segment with equal odds
//                     (segment only on flat sequences)
//   mixed-multi       1..4 edits drawn uniformly, each like mixed-single;
//                     overlaps are redrawn up to 50 times per edit, after
//                     which the edit count is reduced
// Throws ArgumentError for sequences shorter than 2 tokens and StrategyError
// for utterance-single without turn boundaries.
MaskSpec select_mask(const TokenSequence& s, const std::string& strategy, Rng& rng);

}  // namespace cdm
