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

#include "cdm/ngram_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"

namespace cdm {

SmoothingConfig SmoothingConfig::defaults(int order) {
  SmoothingConfig c;
  c.weights.assign(order > 1 ? static_cast<std::size_t>(order - 1) : 0, 0.7);
  return c;
}

void SmoothingConfig::validate(int order) const {
  if (order < 1) throw ArgumentError("n-gram order must be >= 1");
  if (weights.size() != static_cast<std::size_t>(order - 1)) {
    throw ArgumentError("expected " + std::to_string(order - 1) + " interpolation weights, got " +
                        std::to_string(weights.size()));
  }
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw ArgumentError("interpolation weights must lie in [0, 1]");
  }
  if (!(additive > 0.0) || !std::isfinite(additive)) {
    throw ArgumentError("additive smoothing floor must be positive");
  }
}

std::size_t ContextKeyHash::operator()(const ContextKey& key) const noexcept {
  std::uint64_t h = Fnv1a::kOffset;
  for (TokenId t : key) {
    h ^= t;
    h *= Fnv1a::kPrime;
  }
  return static_cast<std::size_t>(h);
}

NgramModel::NgramModel(std::shared_ptr<const Vocabulary> vocab, int order,
                       SmoothingConfig smoothing, std::vector<OrderTable> tables,
                       bool fim_capable, std::string identity)
    : vocab_(std::move(vocab)),
      order_(order),
      smoothing_(std::move(smoothing)),
      tables_(std::move(tables)),
      fim_capable_(fim_capable),
      identity_(std::move(identity)) {
  if (!vocab_) throw ArgumentError("n-gram model requires a vocabulary");
  smoothing_.validate(order_);
  if (tables_.size() != static_cast<std::size_t>(order_)) {
    throw ArgumentError("n-gram model requires one count table per order");
  }
}

std::uint64_t NgramModel::unigram_total() const {
  auto it = tables_[0].find(ContextKey{});
  return it == tables_[0].end() ? 0 : it->second.total;
}

ContextKey NgramModel::context_key(std::span<const TokenId> context, int length) const {
  ContextKey key(static_cast<std::size_t>(length), Vocabulary::kBos);
  const std::size_t have = std::min(context.size(), static_cast<std::size_t>(length));
  std::copy(context.end() - static_cast<std::ptrdiff_t>(have), context.end(),
            key.end() - static_cast<std::ptrdiff_t>(have));
  return key;
}

void NgramModel::mixture(std::span<const TokenId> context, std::vector<double>& probs) const {
  const std::size_t v = vocab_->size();
  probs.assign(v, 0.0);
  const double n = static_cast<double>(unigram_total());
  const double denom = n + smoothing_.additive * static_cast<double>(v);
  for (std::size_t w = 0; w < v; ++w) probs[w] = smoothing_.additive / denom;
  if (auto it = tables_[0].find(ContextKey{}); it != tables_[0].end()) {
    for (const auto& [tok, c] : it->second.counts) {
      probs[tok] = (static_cast<double>(c) + smoothing_.additive) / denom;
    }
  }
  for (int k = 2; k <= order_; ++k) {
    const auto& table = tables_[static_cast<std::size_t>(k - 1)];
    auto it = table.find(context_key(context, k - 1));
    if (it == table.end() || it->second.total == 0) continue;
    const double lambda = smoothing_.weights[static_cast<std::size_t>(k - 2)];
    const double keep = 1.0 - lambda;
    for (auto& p : probs) p *= keep;
    const double total = static_cast<double>(it->second.total);
    for (const auto& [tok, c] : it->second.counts) {
      probs[tok] += lambda * static_cast<double>(c) / total;
    }
  }
}

std::vector<double> NgramModel::next_logprobs(std::span<const TokenId> context) const {
  std::vector<double> probs;
  mixture(context, probs);
  double total = 0.0;
  for (double p : probs) total += p;
  const double log_total = std::log(total);
  for (auto& p : probs) p = std::max(kLogProbFloor, std::log(p) - log_total);
  return probs;
}

double NgramModel::next_logprob(std::span<const TokenId> context, TokenId token) const {
  // Shares next_logprobs()'s normalization so point and vector queries agree
  // bit for bit.
  return next_logprobs(context).at(token);
}

NgramModel train_ngram(std::span<const TokenSequence> corpus,
                       std::shared_ptr<const Vocabulary> vocab, const TrainOptions& options) {
  if (options.order < 1) throw ArgumentError("n-gram order must be >= 1");
  if (!vocab) throw ArgumentError("training requires a vocabulary");
  if (corpus.empty()) throw TrainingError("cannot train on an empty corpus");
  SmoothingConfig smoothing =
      options.smoothing.weights.empty() && options.order > 1 ? SmoothingConfig::defaults(options.order)
                                                             : options.smoothing;
  if (options.order == 1) smoothing.weights.clear();
  smoothing.validate(options.order);

  const auto order = static_cast<std::size_t>(options.order);
  // Ordered maps while counting so the resulting tables do not depend on
  // hash iteration order.
  std::vector<std::map<ContextKey, std::map<TokenId, std::uint64_t>>> counts(order);
  bool fim = false;
  std::size_t tokens = 0;
  std::vector<TokenId> padded;
  for (const auto& seq : corpus) {
    padded.assign(order - 1, Vocabulary::kBos);
    for (TokenId id : seq.ids) {
      if (!vocab->contains(id)) {
        throw IngestionError("token id " + std::to_string(id) + " is not in the vocabulary");
      }
      if (id == Vocabulary::kMid) fim = true;
      padded.push_back(id);
    }
    padded.push_back(Vocabulary::kEos);
    for (std::size_t pos = order - 1; pos < padded.size(); ++pos) {
      const TokenId next = padded[pos];
      for (std::size_t k = 1; k <= order; ++k) {
        ContextKey key(padded.begin() + static_cast<std::ptrdiff_t>(pos - (k - 1)),
                       padded.begin() + static_cast<std::ptrdiff_t>(pos));
        ++counts[k - 1][key][next];
      }
      ++tokens;
    }
  }
  if (tokens == 0) throw TrainingError("corpus contains no tokens");

  std::vector<NgramModel::OrderTable> tables(order);
  for (std::size_t k = 0; k < order; ++k) {
    tables[k].reserve(counts[k].size());
    for (auto& [ctx, succ] : counts[k]) {
      ContextStats stats;
      stats.counts.reserve(succ.size());
      for (const auto& [tok, c] : succ) {
        stats.counts.emplace_back(tok, c);
        stats.total += c;
      }
      tables[k].emplace(ctx, std::move(stats));
    }
  }
  std::string identity =
      options.identity.empty() ? "ngram-" + std::to_string(options.order) : options.identity;
  return NgramModel(std::move(vocab), options.order, std::move(smoothing), std::move(tables), fim,
                    std::move(identity));
}

}  // namespace cdm
