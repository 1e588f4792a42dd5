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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdm/vocabulary.hpp"

namespace cdm {

// A half-open token range [start, start + length).
struct Span {
  std::size_t start = 0;
  std::size_t length = 0;

  std::size_t end() const { return start + length; }
  friend bool operator==(const Span&, const Span&) = default;
};

// A sequence of vocabulary indices. When the sequence is a dialogue, turns
// are joined by Vocabulary::kSep and `turn_starts` holds the index of the
// first token of every turn (including turn 0 at index 0).
struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::size_t> turn_starts;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
  bool has_turns() const { return !turn_starts.empty(); }

  // Throws ArgumentError on an invalid id or malformed turn boundaries.
  void validate(const Vocabulary& vocab) const;

  // Token range of turn `i`, excluding the trailing separator.
  Span turn_span(std::size_t i) const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// Recomputes `turn_starts` from separator positions. Sequences without any
// separator are flat and get no boundaries.
void assign_turns_from_separators(TokenSequence& seq);

enum class OovPolicy {
  kReject,   // IngestionError naming the token
  kUnknown,  // map to Vocabulary::kUnk
  kExtend,   // add to the (mutable) vocabulary
};

struct TokenizerOptions {
  bool lowercase = false;
};

std::vector<std::string> split_whitespace(std::string_view text, const TokenizerOptions& opts = {});

struct EncodeStats {
  std::size_t tokens = 0;
  std::size_t oov = 0;
};

// Whitespace tokenization. A literal "<sep>" token starts a new turn.
TokenSequence encode_text(Vocabulary& vocab, std::string_view text, OovPolicy policy,
                          const TokenizerOptions& opts = {}, EncodeStats* stats = nullptr);
TokenSequence encode_text(const Vocabulary& vocab, std::string_view text, OovPolicy policy,
                          const TokenizerOptions& opts = {}, EncodeStats* stats = nullptr);

// Joins turns with the separator marker and records turn boundaries.
TokenSequence encode_turns(const Vocabulary& vocab, std::span<const std::string> turns,
                           OovPolicy policy, const TokenizerOptions& opts = {},
                           EncodeStats* stats = nullptr);

std::string decode(const Vocabulary& vocab, std::span<const TokenId> ids);

}  // namespace cdm
