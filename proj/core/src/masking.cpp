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

#include "cdm/masking.hpp"

#include <algorithm>

#include "cdm/error.hpp"

namespace cdm {

void MaskSpec::validate(std::size_t sequence_length) const {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i].span;
    if (s.length == 0 || s.end() > sequence_length) throw ArgumentError("mask span out of bounds");
    if (spans[i].kind == SpanKind::kSegment && s.length > kMaxSegmentLength) {
      throw ArgumentError("segment span longer than the segment cap");
    }
    if (i > 0 && spans[i - 1].span.end() > s.start) {
      throw ArgumentError("mask spans must be sorted and non-overlapping");
    }
  }
}

namespace {

MaskedSpan draw_segment(const TokenSequence& s, Rng& rng) {
  const std::size_t max_len = std::min(kMaxSegmentLength, s.size());
  const auto length = static_cast<std::size_t>(rng.uniform_int(1, max_len));
  const auto start = static_cast<std::size_t>(rng.uniform_int(0, s.size() - length));
  return {Span{start, length}, SpanKind::kSegment};
}

std::vector<Span> nonempty_turns(const TokenSequence& s) {
  std::vector<Span> out;
  for (std::size_t i = 0; i < s.turn_starts.size(); ++i) {
    const Span t = s.turn_span(i);
    if (t.length > 0) out.push_back(t);
  }
  return out;
}

MaskedSpan draw_utterance(const TokenSequence& s, Rng& rng) {
  const auto turns = nonempty_turns(s);
  if (turns.empty()) throw StrategyError("utterance strategies require turn boundaries");
  const auto i = static_cast<std::size_t>(rng.uniform_int(0, turns.size() - 1));
  return {turns[i], SpanKind::kUtterance};
}

MaskedSpan draw_mixed(const TokenSequence& s, Rng& rng) {
  // The coin is flipped on flat sequences too, so the draw sequence does not
  // depend on whether turns exist.
  const bool utterance = rng.uniform_int(0, 1) == 1;
  if (utterance && s.has_turns() && !nonempty_turns(s).empty()) return draw_utterance(s, rng);
  return draw_segment(s, rng);
}

void check_length(const TokenSequence& s) {
  if (s.size() < 2) throw ArgumentError("span selection requires at least 2 tokens");
}

bool overlaps(const Span& a, const Span& b) { return a.start < b.end() && b.start < a.end(); }

MaskSpec single(MaskedSpan span) {
  MaskSpec m;
  m.spans.push_back(span);
  m.requested_edits = 1;
  return m;
}

}  // namespace

StrategyRegistry StrategyRegistry::with_builtins() {
  StrategyRegistry r;
  r.add("segment-single", [](const TokenSequence& s, Rng& rng) {
    check_length(s);
    return single(draw_segment(s, rng));
  });
  r.add("utterance-single", [](const TokenSequence& s, Rng& rng) {
    check_length(s);
    if (!s.has_turns()) throw StrategyError("utterance-single requires turn boundaries");
    return single(draw_utterance(s, rng));
  });
  r.add("mixed-single", [](const TokenSequence& s, Rng& rng) {
    check_length(s);
    return single(draw_mixed(s, rng));
  });
  r.add("mixed-multi", [](const TokenSequence& s, Rng& rng) {
    check_length(s);
    MaskSpec m;
    m.requested_edits = static_cast<std::size_t>(rng.uniform_int(1, kMaxEdits));
    for (std::size_t e = 0; e < m.requested_edits; ++e) {
      bool placed = false;
      for (int attempt = 0; attempt < kOverlapAttempts && !placed; ++attempt) {
        const MaskedSpan cand = draw_mixed(s, rng);
        const bool clash = std::any_of(m.spans.begin(), m.spans.end(),
                                       [&](const MaskedSpan& x) { return overlaps(x.span, cand.span); });
        if (!clash) {
          m.spans.push_back(cand);
          placed = true;
        }
      }
      if (!placed) break;  // edit count reduced
    }
    std::sort(m.spans.begin(), m.spans.end(),
              [](const MaskedSpan& a, const MaskedSpan& b) { return a.span.start < b.span.start; });
    return m;
  });
  return r;
}

void StrategyRegistry::add(std::string name, SpanSelector selector) {
  if (name.empty() || !selector) throw ArgumentError("strategy needs a name and a selector");
  selectors_[std::move(name)] = std::move(selector);
}

std::vector<std::string> StrategyRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, sel] : selectors_) out.push_back(name);
  return out;
}

MaskSpec StrategyRegistry::select(const std::string& name, const TokenSequence& s, Rng& rng) const {
  auto it = selectors_.find(name);
  if (it == selectors_.end()) throw StrategyError("unknown manipulation strategy '" + name + "'");
  MaskSpec m = it->second(s, rng);
  m.validate(s.size());
  return m;
}

MaskSpec select_mask(const TokenSequence& s, const std::string& strategy, Rng& rng) {
  static const StrategyRegistry kBuiltins = StrategyRegistry::with_builtins();
  return kBuiltins.select(strategy, s, rng);
}

}  // namespace cdm
