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

#include "world.hpp"

#include "cdm/fim.hpp"
#include "cdm/ngram_model.hpp"
#include "cdm/random.hpp"

namespace cdm::desk {

World make_world(std::uint64_t seed, const std::vector<int>& plain_orders,
                 const std::vector<int>& fim_orders) {
  MarkovSpec spec;
  spec.seed = seed;
  return make_world(spec, plain_orders, fim_orders);
}

World make_world(const MarkovSpec& spec, const std::vector<int>& plain_orders,
                 const std::vector<int>& fim_orders) {
  const std::uint64_t seed = spec.seed;
  World w;
  w.chain = std::make_unique<MarkovChain>(spec);
  auto corpus = make_corpus(spec, 50'000, 10'000);
  w.vocab = corpus.vocab;
  w.train = std::move(corpus.train);
  w.heldout = std::move(corpus.heldout);
  for (int order : plain_orders) {
    TrainOptions opts;
    opts.order = order;
    opts.identity = "ngram-" + std::to_string(order);
    w.plain[order] = std::make_shared<NgramModel>(train_ngram(w.train, w.vocab, opts));
  }
  if (!fim_orders.empty()) {
    Rng rng = Rng::for_task(seed, "fim-corpus");
    const auto fim_corpus = make_fim_training_corpus(w.train, 1, rng);
    for (int order : fim_orders) {
      TrainOptions opts;
      opts.order = order;
      opts.identity = "ngram-fim-" + std::to_string(order);
      w.fim[order] = std::make_shared<NgramModel>(train_ngram(fim_corpus, w.vocab, opts));
    }
  }
  return w;
}

std::vector<TokenSequence> fresh_documents(const World& w, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t avg = (w.chain->spec().min_doc_length + w.chain->spec().max_doc_length) / 2;
  std::vector<std::vector<int>> docs;
  while (docs.size() < count) {
    auto more = w.chain->sample_documents(avg * (count - docs.size()) + avg, rng);
    for (auto& d : more) {
      if (docs.size() < count) docs.push_back(std::move(d));
    }
  }
  return w.chain->encode(*w.vocab, docs);
}

TokenSequence random_swaps(const TokenSequence& s, std::size_t swaps, std::uint64_t seed) {
  TokenSequence out = s;
  out.turn_starts.clear();
  Rng rng(seed);
  const auto n = static_cast<std::int64_t>(out.ids.size());
  if (n < 2) return out;
  for (std::size_t k = 0; k < swaps; ++k) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
      if (i == j || out.ids[i] == out.ids[j]) continue;
      std::swap(out.ids[i], out.ids[j]);
      break;
    }
  }
  return out;
}

}  // namespace cdm::desk
