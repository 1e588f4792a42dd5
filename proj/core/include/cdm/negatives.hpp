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

#include "cdm/degradation.hpp"
#include "cdm/masking.hpp"
#include "cdm/momentum.hpp"
#include "cdm/token_sequence.hpp"

namespace cdm {

enum class RegenerationMode {
  kFillInMiddle,  // condition on prefix and suffix via the PSM prompt
  kSuffixBlind,   // condition on the prefix only (lower fidelity)
};

struct RegeneratedSpan {
  std::vector<TokenId> tokens;
  bool truncated = false;
};

// Samples a replacement for `span` from
//   log p_edit(x) ∝ (1 + gamma) log p_a(x | c) - gamma log p_e(x | c)
// step by step, where c is the PSM prompt built from the tokens around the
// span. Stops at the end marker or after 2 * span.length tokens.
// Throws ArgumentError for an empty or out-of-range span and
// CapabilityError when FIM mode is requested from models that were not
// trained for it.
RegeneratedSpan regenerate_segment(const ContrastPair& pair, const TokenSequence& s, Span span,
                                   const DegradationConfig& cfg, Rng& rng,
                                   RegenerationMode mode = RegenerationMode::kFillInMiddle);

struct PositiveExample {
  std::string id;
  TokenSequence seq;
};

struct EditedSpan {
  Span original;            // coordinates in the source sequence
  std::size_t regenerated;  // number of tokens written in its place
};

struct NegativeSampleRecord {
  std::string source_id;
  std::string strategy;       // name of the generator ("cdm" or "resample-baseline")
  std::string mask_strategy;  // span selector used
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::vector<EditedSpan> edits;
  std::string original_text;
  std::string manipulated_text;
  TokenSequence manipulated;
};

struct SynthesisOptions {
  std::string strategy = "segment-single";
  DegradationConfig degradation;
  RegenerationMode mode = RegenerationMode::kFillInMiddle;
  std::size_t jobs = 1;
  // Extra draws when a regeneration reproduces the source span.
  int max_attempts = 8;
  // Fraction of skipped records that turns into a RunError.
  double max_skip_fraction = 0.10;
  bool audit_passed = false;  // a warning is logged when false
  const StrategyRegistry* registry = nullptr;  // null -> built-ins
};

struct SkippedRecord {
  std::string source_id;
  std::string reason;
};

struct SynthesisResult {
  std::vector<NegativeSampleRecord> records;  // in input order
  std::vector<SkippedRecord> skipped;
  std::vector<std::string> warnings;
};

// Generative negative synthesis: per positive, choose spans, regenerate them
// left to right (each edit conditions on the ones already applied), and
// record full provenance. Each record draws from Rng::for_task(seed, id).
SynthesisResult synthesize_negatives(const ContrastPair& pair,
                                     std::span<const PositiveExample> positives,
                                     const SynthesisOptions& options);

// Ablation arm: the same procedure with gamma fixed to 0, sampling from the
// amateur alone. Records are labelled "resample-baseline".
SynthesisResult resample_baseline(const LanguageModelHandle& amateur,
                                  std::span<const PositiveExample> positives,
                                  const SynthesisOptions& options);

// One JSONL line; `manipulated` is not serialized (re-encode the text).
std::string negative_record_json(const NegativeSampleRecord& r);
// Parses the fields written by negative_record_json. Throws FormatError.
NegativeSampleRecord parse_negative_record(const std::string& line);

// Replays one record from its provenance.
NegativeSampleRecord replay_negative(const ContrastPair& pair, const PositiveExample& positive,
                                     const SynthesisOptions& options);

}  // namespace cdm
