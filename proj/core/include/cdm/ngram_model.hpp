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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cdm/language_model.hpp"
#include "cdm/token_sequence.hpp"
#include "cdm/vocabulary.hpp"

namespace cdm {

// Interpolated backoff smoothing.
//
//   P_1(w)   = (c(w) + additive) / (N + additive * |V|)
//   P_k(w|h) = weight_k * c(h, w) / c(h) + (1 - weight_k) * P_{k-1}(w|h')
//
// where h' drops the oldest token of h, and an unseen context h falls
// through to P_{k-1} entirely. `weights[k - 2]` is weight_k for k = 2..n.
// With every weight at 0.7 the effective mixture over orders n, n-1, ...
// decays geometrically (0.7, 0.21, 0.063, ...).
struct SmoothingConfig {
  std::vector<double> weights;
  double additive = 0.01;

  static SmoothingConfig defaults(int order);
  // Throws ArgumentError for weights outside [0, 1], a non-positive
  // additive floor, or a weight count that does not match `order`.
  void validate(int order) const;
};

struct ContextStats {
  std::uint64_t total = 0;
  // Sorted by token id.
  std::vector<std::pair<TokenId, std::uint64_t>> counts;
};

// Key for a context of fixed length within one order table.
using ContextKey = std::vector<TokenId>;

struct ContextKeyHash {
  std::size_t operator()(const ContextKey& key) const noexcept;
};

// Immutable n-gram model over a shared vocabulary. Contexts shorter than
// n-1 tokens are left-padded with the begin marker.
class NgramModel final : public LanguageModel {
 public:
  // tables[k - 1] maps contexts of length k - 1 to successor counts.
  using OrderTable = std::unordered_map<ContextKey, ContextStats, ContextKeyHash>;

  NgramModel(std::shared_ptr<const Vocabulary> vocab, int order, SmoothingConfig smoothing,
             std::vector<OrderTable> tables, bool fim_capable, std::string identity);

  std::vector<double> next_logprobs(std::span<const TokenId> context) const override;
  double next_logprob(std::span<const TokenId> context, TokenId token) const override;
  const Vocabulary& vocabulary() const override { return *vocab_; }
  std::string identity() const override { return identity_; }
  BackendKind kind() const override { return BackendKind::kLocalNgram; }
  bool fim_capable() const override { return fim_capable_; }

  std::shared_ptr<const Vocabulary> shared_vocabulary() const { return vocab_; }
  int order() const { return order_; }
  const SmoothingConfig& smoothing() const { return smoothing_; }
  const std::vector<OrderTable>& tables() const { return tables_; }
  std::uint64_t unigram_total() const;

 private:
  // Unnormalized mixture probabilities before the final log/normalize pass.
  void mixture(std::span<const TokenId> context, std::vector<double>& probs) const;
  ContextKey context_key(std::span<const TokenId> context, int length) const;

  std::shared_ptr<const Vocabulary> vocab_;
  int order_;
  SmoothingConfig smoothing_;
  std::vector<OrderTable> tables_;
  bool fim_capable_;
  std::string identity_;
};

struct TrainOptions {
  int order = 3;
  SmoothingConfig smoothing;  // empty weights -> SmoothingConfig::defaults(order)
  std::string identity;       // empty -> "ngram-<order>"
};

// Counts every prefix context of every sequence (end marker appended).
// Throws TrainingError on an empty corpus and ArgumentError on order < 1.
// A corpus containing the middle sentinel yields a fill-in-the-middle model.
NgramModel train_ngram(std::span<const TokenSequence> corpus,
                       std::shared_ptr<const Vocabulary> vocab, const TrainOptions& options);

}  // namespace cdm
