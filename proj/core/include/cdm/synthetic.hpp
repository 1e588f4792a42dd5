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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cdm/random.hpp"
#include "cdm/token_sequence.hpp"
#include "cdm/vocabulary.hpp"

namespace cdm {

// Synthetic Markov source used for desk-scale experiments and audits.
//
// The next token depends on the previous `order` tokens (begin-padded).
// The candidate successors of a context are fixed by its most recent token;
// the weights over them are a permutation of `weight_profile` selected by
// hashing the whole context, so each extra token of history carries
// information and the chain is only fully captured by (order + 1)-grams.
struct MarkovSpec {
  int vocab_size = 64;
  int order = 3;
  int branching = 8;
  std::uint64_t seed = 7;
  // Successor weights before permutation; normalized internally. Empty ->
  // a geometric profile with ratio 0.55.
  std::vector<double> weight_profile;
  std::size_t min_doc_length = 16;
  std::size_t max_doc_length = 32;
};

class MarkovChain {
 public:
  explicit MarkovChain(MarkovSpec spec);

  const MarkovSpec& spec() const { return spec_; }
  // Content tokens are "w00", "w01", ...
  std::string token_name(int symbol) const;
  std::shared_ptr<Vocabulary> make_vocabulary() const;

  // Successor symbols and their probabilities for a context of `order`
  // symbols, where -1 stands for the begin padding.
  void successors(std::span<const int> context, std::vector<int>& symbols,
                  std::vector<double>& probs) const;

  // Documents with lengths uniform in [min_doc_length, max_doc_length].
  std::vector<std::vector<int>> sample_documents(std::size_t total_tokens, Rng& rng) const;
  // One unbroken stream of `length` symbols.
  std::vector<int> sample_stream(std::size_t length, Rng& rng) const;

  std::vector<TokenSequence> encode(const Vocabulary& vocab,
                                    std::span<const std::vector<int>> docs) const;

 private:
  MarkovSpec spec_;
  std::vector<double> profile_;
  std::vector<std::vector<int>> candidates_;  // indexed by last symbol + 1
};

// The bundled corpus: an order-3 chain over 64 tokens with `train_tokens`
// training and `heldout_tokens` held-out tokens, split into documents.
struct SyntheticCorpus {
  std::shared_ptr<Vocabulary> vocab;
  std::vector<TokenSequence> train;
  std::vector<TokenSequence> heldout;
};

SyntheticCorpus make_bundled_corpus(std::uint64_t seed, std::size_t train_tokens = 50'000,
                                    std::size_t heldout_tokens = 10'000);
// Same split for any chain.
SyntheticCorpus make_corpus(const MarkovSpec& spec, std::size_t train_tokens,
                            std::size_t heldout_tokens);

}  // namespace cdm
