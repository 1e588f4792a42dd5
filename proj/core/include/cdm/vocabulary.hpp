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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cdm {

using TokenId = std::uint32_t;

// Bijective token <-> index map. The first kNumReserved indices are the
// special markers and are present in every vocabulary.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kSep = 2;  // turn separator
  static constexpr TokenId kPre = 3;
  static constexpr TokenId kSuf = 4;
  static constexpr TokenId kMid = 5;
  static constexpr TokenId kUnk = 6;
  static constexpr std::size_t kNumReserved = 7;

  Vocabulary();

  // Builds a vocabulary from content tokens; reserved markers come first.
  // Duplicates are collapsed, reserved spellings are accepted and ignored.
  static Vocabulary from_tokens(std::span<const std::string> tokens);

  // Adds `token` if absent; returns its index either way.
  TokenId add(std::string_view token);

  std::optional<TokenId> find(std::string_view token) const;
  // Throws IngestionError naming the token when absent.
  TokenId lookup(std::string_view token) const;
  TokenId lookup_or_unk(std::string_view token) const;

  const std::string& token(TokenId id) const;
  bool contains(TokenId id) const { return id < tokens_.size(); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  static bool is_reserved(TokenId id) { return id < kNumReserved; }

  // Stable digest of the ordered token list; two vocabularies with the same
  // fingerprint index tokens identically.
  std::uint64_t fingerprint() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace cdm
