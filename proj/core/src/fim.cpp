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

#include "cdm/fim.hpp"

#include <algorithm>

#include "cdm/error.hpp"

namespace cdm {

namespace {

void check_span(std::size_t size, Span span) {
  if (span.length == 0) throw ArgumentError("span length must be >= 1");
  if (span.start > size || span.length > size - span.start) {
    throw ArgumentError("span [" + std::to_string(span.start) + ", " + std::to_string(span.end()) +
                        ") out of bounds for sequence of length " + std::to_string(size));
  }
}

}  // namespace

std::vector<TokenId> fim_prompt(std::span<const TokenId> ids, Span span) {
  check_span(ids.size(), span);
  std::vector<TokenId> out;
  out.reserve(ids.size() - span.length + 3);
  out.push_back(Vocabulary::kPre);
  out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(span.start));
  out.push_back(Vocabulary::kSuf);
  out.insert(out.end(), ids.begin() + static_cast<std::ptrdiff_t>(span.end()), ids.end());
  out.push_back(Vocabulary::kMid);
  return out;
}

TokenSequence fim_transform(const TokenSequence& s, Span span) {
  TokenSequence out;
  out.ids = fim_prompt(s.ids, span);
  out.ids.insert(out.ids.end(), s.ids.begin() + static_cast<std::ptrdiff_t>(span.start),
                 s.ids.begin() + static_cast<std::ptrdiff_t>(span.end()));
  out.ids.push_back(Vocabulary::kEos);
  return out;
}

FimParts fim_inverse(const TokenSequence& fim) {
  const auto& ids = fim.ids;
  auto find_from = [&](std::size_t from, TokenId marker) {
    auto it = std::find(ids.begin() + static_cast<std::ptrdiff_t>(from), ids.end(), marker);
    if (it == ids.end()) throw ArgumentError("fill-in-the-middle sentinel missing");
    return static_cast<std::size_t>(it - ids.begin());
  };
  if (ids.empty() || ids.front() != Vocabulary::kPre) {
    throw ArgumentError("fill-in-the-middle sequence must start with the prefix sentinel");
  }
  const std::size_t suf = find_from(1, Vocabulary::kSuf);
  const std::size_t mid = find_from(suf + 1, Vocabulary::kMid);
  std::size_t end = ids.size();
  if (end > mid + 1 && ids.back() == Vocabulary::kEos) --end;

  FimParts parts;
  auto& out = parts.original.ids;
  out.insert(out.end(), ids.begin() + 1, ids.begin() + static_cast<std::ptrdiff_t>(suf));
  parts.span.start = out.size();
  out.insert(out.end(), ids.begin() + static_cast<std::ptrdiff_t>(mid + 1),
             ids.begin() + static_cast<std::ptrdiff_t>(end));
  parts.span.length = out.size() - parts.span.start;
  out.insert(out.end(), ids.begin() + static_cast<std::ptrdiff_t>(suf + 1),
             ids.begin() + static_cast<std::ptrdiff_t>(mid));
  return parts;
}

std::vector<TokenSequence> make_fim_training_corpus(std::span<const TokenSequence> corpus,
                                                    int copies, Rng& rng) {
  std::vector<TokenSequence> out;
  out.reserve(corpus.size() * static_cast<std::size_t>(1 + std::max(copies, 0)));
  for (const auto& s : corpus) {
    out.push_back(TokenSequence{s.ids, {}});
    if (s.empty()) continue;
    for (int c = 0; c < copies; ++c) {
      const std::size_t max_len = std::min<std::size_t>(s.size(), 20);
      const auto length = static_cast<std::size_t>(rng.uniform_int(1, max_len));
      const auto start = static_cast<std::size_t>(rng.uniform_int(0, s.size() - length));
      TokenSequence f = fim_transform(s, Span{start, length});
      f.ids.pop_back();
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace cdm
