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

#include "cdm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"

namespace cdm {

MarkovChain::MarkovChain(MarkovSpec spec) : spec_(std::move(spec)) {
  if (spec_.vocab_size < 2) throw ArgumentError("Markov source needs at least 2 symbols");
  if (spec_.order < 1) throw ArgumentError("Markov order must be >= 1");
  if (spec_.branching < 1 || spec_.branching > spec_.vocab_size) {
    throw ArgumentError("branching must lie in [1, vocab_size]");
  }
  if (spec_.min_doc_length < 1 || spec_.max_doc_length < spec_.min_doc_length) {
    throw ArgumentError("invalid document length range");
  }
  profile_ = spec_.weight_profile;
  if (profile_.empty()) {
    double w = 1.0;
    for (int i = 0; i < spec_.branching; ++i, w *= 0.55) profile_.push_back(w);
  }
  if (profile_.size() != static_cast<std::size_t>(spec_.branching)) {
    throw ArgumentError("weight profile length must equal branching");
  }
  const double total = std::accumulate(profile_.begin(), profile_.end(), 0.0);
  for (auto& w : profile_) w /= total;

  // Candidate successors per most-recent symbol (index 0 is the padding).
  Rng rng(spec_.seed);
  candidates_.resize(static_cast<std::size_t>(spec_.vocab_size) + 1);
  std::vector<int> all(static_cast<std::size_t>(spec_.vocab_size));
  std::iota(all.begin(), all.end(), 0);
  for (auto& cand : candidates_) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec_.branching); ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(i, all.size() - 1));
      std::swap(all[i], all[j]);
    }
    cand.assign(all.begin(), all.begin() + spec_.branching);
  }
}

std::string MarkovChain::token_name(int symbol) const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%02d", symbol);
  return buf;
}

std::shared_ptr<Vocabulary> MarkovChain::make_vocabulary() const {
  auto vocab = std::make_shared<Vocabulary>();
  for (int s = 0; s < spec_.vocab_size; ++s) vocab->add(token_name(s));
  return vocab;
}

void MarkovChain::successors(std::span<const int> context, std::vector<int>& symbols,
                             std::vector<double>& probs) const {
  if (context.size() != static_cast<std::size_t>(spec_.order)) {
    throw ArgumentError("Markov context must hold exactly `order` symbols");
  }
  const int last = context.back();
  symbols = candidates_[static_cast<std::size_t>(last + 1)];
  Fnv1a h(Rng::splitmix(spec_.seed));
  for (int c : context) h.update_u64(static_cast<std::uint64_t>(c + 1));
  // Fisher-Yates over the profile, driven by the context hash.
  std::uint64_t state = h.digest();
  probs = profile_;
  for (std::size_t i = probs.size(); i > 1; --i) {
    state = Rng::splitmix(state);
    std::swap(probs[i - 1], probs[state % i]);
  }
}

namespace {

int draw(const std::vector<int>& symbols, const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return symbols[i];
  }
  return symbols.back();
}

}  // namespace

std::vector<int> MarkovChain::sample_stream(std::size_t length, Rng& rng) const {
  std::vector<int> context(static_cast<std::size_t>(spec_.order), -1);
  std::vector<int> out;
  out.reserve(length);
  std::vector<int> symbols;
  std::vector<double> probs;
  for (std::size_t i = 0; i < length; ++i) {
    successors(context, symbols, probs);
    const int next = draw(symbols, probs, rng);
    out.push_back(next);
    context.erase(context.begin());
    context.push_back(next);
  }
  return out;
}

std::vector<std::vector<int>> MarkovChain::sample_documents(std::size_t total_tokens,
                                                            Rng& rng) const {
  std::vector<std::vector<int>> docs;
  std::size_t produced = 0;
  while (produced < total_tokens) {
    auto len = static_cast<std::size_t>(rng.uniform_int(spec_.min_doc_length, spec_.max_doc_length));
    len = std::min(len, std::max<std::size_t>(total_tokens - produced, spec_.min_doc_length));
    docs.push_back(sample_stream(len, rng));
    produced += len;
  }
  return docs;
}

std::vector<TokenSequence> MarkovChain::encode(const Vocabulary& vocab,
                                               std::span<const std::vector<int>> docs) const {
  std::vector<TokenSequence> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    TokenSequence s;
    s.ids.reserve(d.size());
    for (int sym : d) s.ids.push_back(vocab.lookup(token_name(sym)));
    out.push_back(std::move(s));
  }
  return out;
}

SyntheticCorpus make_bundled_corpus(std::uint64_t seed, std::size_t train_tokens,
                                    std::size_t heldout_tokens) {
  MarkovSpec spec;
  spec.seed = seed;
  return make_corpus(spec, train_tokens, heldout_tokens);
}

SyntheticCorpus make_corpus(const MarkovSpec& spec, std::size_t train_tokens,
                            std::size_t heldout_tokens) {
  const std::uint64_t seed = spec.seed;
  MarkovChain chain(spec);
  SyntheticCorpus corpus;
  corpus.vocab = chain.make_vocabulary();
  Rng train_rng = Rng::for_task(seed, "train");
  Rng heldout_rng = Rng::for_task(seed, "heldout");
  const auto train_docs = chain.sample_documents(train_tokens, train_rng);
  const auto heldout_docs = chain.sample_documents(heldout_tokens, heldout_rng);
  corpus.train = chain.encode(*corpus.vocab, train_docs);
  corpus.heldout = chain.encode(*corpus.vocab, heldout_docs);
  return corpus;
}

}  // namespace cdm
