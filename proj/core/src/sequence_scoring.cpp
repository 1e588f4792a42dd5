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

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdm/error.hpp"
#include "cdm/language_model.hpp"

namespace cdm {

const char* backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kLocalNgram:
      return "local-ngram";
    case BackendKind::kRemote:
      return "remote";
    case BackendKind::kOther:
      return "other";
  }
  return "other";
}

double LanguageModel::next_logprob(std::span<const TokenId> context, TokenId token) const {
  return next_logprobs(context).at(token);
}

double logsumexp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

void normalize_logprobs(std::vector<double>& logprobs) {
  for (auto& v : logprobs) {
    if (std::isnan(v)) throw ArgumentError("NaN log-probability");
    v = std::max(v, kLogProbFloor);
  }
  const double z = logsumexp(logprobs);
  for (auto& v : logprobs) v = std::max(kLogProbFloor, v - z);
}

double sequence_logprob(const LanguageModel& model, const TokenSequence& s) {
  if (s.empty()) throw ArgumentError("sequence_logprob requires a non-empty sequence");
  std::span<const TokenId> ids(s.ids);
  double total = 0.0;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    total += model.next_logprob(ids.first(t), ids[t]);
  }
  total += model.next_logprob(ids, Vocabulary::kEos);
  return total;
}

double perplexity(const LanguageModel& model, std::span<const TokenSequence> corpus) {
  if (corpus.empty()) throw ArgumentError("perplexity requires a non-empty corpus");
  double total = 0.0;
  std::size_t steps = 0;
  for (const auto& s : corpus) {
    if (s.empty()) continue;
    total += sequence_logprob(model, s);
    steps += s.size() + 1;
  }
  if (steps == 0) throw ArgumentError("perplexity requires at least one non-empty sequence");
  return std::exp(-total / static_cast<double>(steps));
}

TokenId sample_index(std::span<const double> logprobs, Rng& rng) {
  if (logprobs.empty()) throw ArgumentError("cannot sample from an empty distribution");
  double total = 0.0;
  for (double lp : logprobs) total += std::exp(lp);
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < logprobs.size(); ++i) {
    cum += std::exp(logprobs[i]);
    if (u < cum) return static_cast<TokenId>(i);
  }
  // Rounding left u at the top of the range: fall back to the last token
  // carrying non-floor mass.
  for (std::size_t i = logprobs.size(); i-- > 0;) {
    if (logprobs[i] > kLogProbFloor) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(logprobs.size() - 1);
}

SampledSequence sample_sequence(const LanguageModel& model, std::span<const TokenId> prefix,
                                std::size_t max_length, Rng& rng) {
  SampledSequence out;
  std::vector<TokenId> context(prefix.begin(), prefix.end());
  while (out.tokens.size() < max_length) {
    const auto lp = model.next_logprobs(context);
    const TokenId next = sample_index(lp, rng);
    if (next == Vocabulary::kEos) return out;
    out.tokens.push_back(next);
    context.push_back(next);
  }
  out.truncated = true;
  return out;
}

}  // namespace cdm
