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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cdm/random.hpp"
#include "cdm/token_sequence.hpp"
#include "cdm/vocabulary.hpp"

namespace cdm {

// Natural-log floor applied to every emitted log-probability.
inline constexpr double kLogProbFloor = -50.0;

enum class BackendKind { kLocalNgram, kRemote, kOther };

const char* backend_kind_name(BackendKind kind);

// Uniform next-token interface over local and remote backends.
// Implementations must be safe for concurrent const use.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  // Natural-log next-token distribution over the full vocabulary given the
  // tokens observed so far. Values are >= kLogProbFloor and exp-sum to 1.
  virtual std::vector<double> next_logprobs(std::span<const TokenId> context) const = 0;

  // Log-probability of a single token. The default forwards to
  // next_logprobs(); backends override it when a point query is cheaper.
  virtual double next_logprob(std::span<const TokenId> context, TokenId token) const;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::string identity() const = 0;
  virtual BackendKind kind() const = 0;

  // True when trained on prefix/suffix/middle rearranged data, i.e. able to
  // condition on both sides of a masked span.
  virtual bool fim_capable() const { return false; }
};

using LanguageModelHandle = std::shared_ptr<const LanguageModel>;

// log(sum(exp(v))) computed stably.
double logsumexp(std::span<const double> values);

// Clamps at kLogProbFloor and shifts so that exp-sum is 1.
void normalize_logprobs(std::vector<double>& logprobs);

// Log-probability of `s` followed by the end marker, accumulated left to
// right. Throws ArgumentError on an empty sequence.
double sequence_logprob(const LanguageModel& model, const TokenSequence& s);

// exp(-total logprob / total predicted steps); every sequence contributes
// len + 1 steps (the end marker is predicted).
double perplexity(const LanguageModel& model, std::span<const TokenSequence> corpus);

// Draws an index from a normalized log-probability vector by inverse CDF.
TokenId sample_index(std::span<const double> logprobs, Rng& rng);

struct SampledSequence {
  std::vector<TokenId> tokens;  // excludes the end marker
  bool truncated = false;       // length cap hit before the end marker
};

// Plain ancestral sampling from `model`, continuing `prefix`.
SampledSequence sample_sequence(const LanguageModel& model, std::span<const TokenId> prefix,
                                std::size_t max_length, Rng& rng);

}  // namespace cdm
