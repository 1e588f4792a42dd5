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

#include "cdm/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <type_traits>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"
#include "cdm/random.hpp"
#include "cdm/token_sequence.hpp"

namespace cdm {

namespace {

constexpr const char* kReservedSpellings[Vocabulary::kNumReserved] = {
    "<s>", "</s>", "<sep>", "<pre>", "<suf>", "<mid>", "<unk>"};

}  // namespace

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Vocabulary::Vocabulary() {
  for (const char* t : kReservedSpellings) add(t);
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> tokens) {
  Vocabulary v;
  for (const auto& t : tokens) v.add(t);
  return v;
}

TokenId Vocabulary::add(std::string_view token) {
  if (token.empty()) throw IngestionError("empty token");
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::lookup(std::string_view token) const {
  if (auto id = find(token)) return *id;
  throw IngestionError("out-of-vocabulary token '" + std::string(token) + "'");
}

TokenId Vocabulary::lookup_or_unk(std::string_view token) const {
  if (auto id = find(token)) return *id;
  return kUnk;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw ArgumentError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::uint64_t Vocabulary::fingerprint() const {
  Fnv1a h;
  for (const auto& t : tokens_) {
    h.update(t);
    h.update(std::string_view("\n", 1));
  }
  return h.digest();
}

// --- Rng -------------------------------------------------------------------

Rng Rng::for_task(std::uint64_t seed, std::string_view task_id) {
  return Rng(splitmix(seed) ^ fnv1a(task_id));
}

Rng Rng::for_task(std::uint64_t seed, std::uint64_t task_index) {
  return Rng(splitmix(seed) ^ splitmix(task_index + 0x51ed2701ULL));
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
  if (hi < lo) throw ArgumentError("uniform_int: empty range");
  const std::uint64_t range = hi - lo;
  if (range == ~std::uint64_t{0}) return engine_();
  const std::uint64_t span = range + 1;
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % span);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return lo + x % span;
}

double Rng::normal() {
  // Box-Muller; the second variate is discarded to keep draws stateless.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// --- TokenSequence -----------------------------------------------------------

void TokenSequence::validate(const Vocabulary& vocab) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!vocab.contains(ids[i])) {
      throw ArgumentError("token id " + std::to_string(ids[i]) + " at position " +
                          std::to_string(i) + " is not in the vocabulary");
    }
  }
  for (std::size_t i = 0; i < turn_starts.size(); ++i) {
    if (turn_starts[i] >= ids.size()) throw ArgumentError("turn boundary out of bounds");
    if (i > 0 && turn_starts[i] <= turn_starts[i - 1]) {
      throw ArgumentError("turn boundaries must be strictly increasing");
    }
  }
}

Span TokenSequence::turn_span(std::size_t i) const {
  if (i >= turn_starts.size()) throw ArgumentError("turn index out of range");
  const std::size_t start = turn_starts[i];
  std::size_t end = i + 1 < turn_starts.size() ? turn_starts[i + 1] : ids.size();
  if (i + 1 < turn_starts.size() && end > start && ids[end - 1] == Vocabulary::kSep) --end;
  return Span{start, end - start};
}

void assign_turns_from_separators(TokenSequence& seq) {
  seq.turn_starts.clear();
  const bool any_sep =
      std::find(seq.ids.begin(), seq.ids.end(), Vocabulary::kSep) != seq.ids.end();
  if (!any_sep) return;
  seq.turn_starts.push_back(0);
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    if (seq.ids[i] == Vocabulary::kSep && i + 1 < seq.ids.size()) seq.turn_starts.push_back(i + 1);
  }
}

std::vector<std::string> split_whitespace(std::string_view text, const TokenizerOptions& opts) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      std::string tok(text.substr(start, i - start));
      if (opts.lowercase) {
        std::transform(tok.begin(), tok.end(), tok.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      }
      out.push_back(std::move(tok));
    }
  }
  return out;
}

namespace {

template <typename Vocab>
TokenId map_token(Vocab& vocab, const std::string& tok, OovPolicy policy, EncodeStats* stats) {
  if (stats) ++stats->tokens;
  if (auto id = vocab.find(tok)) return *id;
  if (stats) ++stats->oov;
  switch (policy) {
    case OovPolicy::kReject:
      throw IngestionError("out-of-vocabulary token '" + tok + "'");
    case OovPolicy::kUnknown:
      return Vocabulary::kUnk;
    case OovPolicy::kExtend:
      if constexpr (std::is_const_v<Vocab>) {
        throw ArgumentError("cannot extend a read-only vocabulary");
      } else {
        return vocab.add(tok);
      }
  }
  return Vocabulary::kUnk;
}

template <typename Vocab>
TokenSequence encode_impl(Vocab& vocab, std::string_view text, OovPolicy policy,
                          const TokenizerOptions& opts, EncodeStats* stats) {
  TokenSequence seq;
  for (const auto& tok : split_whitespace(text, opts)) {
    seq.ids.push_back(map_token(vocab, tok, policy, stats));
  }
  assign_turns_from_separators(seq);
  return seq;
}

}  // namespace

TokenSequence encode_text(Vocabulary& vocab, std::string_view text, OovPolicy policy,
                          const TokenizerOptions& opts, EncodeStats* stats) {
  return encode_impl(vocab, text, policy, opts, stats);
}

TokenSequence encode_text(const Vocabulary& vocab, std::string_view text, OovPolicy policy,
                          const TokenizerOptions& opts, EncodeStats* stats) {
  return encode_impl(vocab, text, policy, opts, stats);
}

TokenSequence encode_turns(const Vocabulary& vocab, std::span<const std::string> turns,
                           OovPolicy policy, const TokenizerOptions& opts, EncodeStats* stats) {
  TokenSequence seq;
  for (std::size_t t = 0; t < turns.size(); ++t) {
    if (t > 0) seq.ids.push_back(Vocabulary::kSep);
    for (const auto& tok : split_whitespace(turns[t], opts)) {
      seq.ids.push_back(map_token(vocab, tok, policy, stats));
    }
  }
  assign_turns_from_separators(seq);
  return seq;
}

std::string decode(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += vocab.token(ids[i]);
  }
  return out;
}

}  // namespace cdm
