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
#include <vector>

#include "cdm/language_model.hpp"
#include "cdm/synthetic.hpp"

namespace cdm::desk {

// Shared fixture: the bundled chain, its training corpus and n-gram
// families trained on it.
struct World {
  std::unique_ptr<MarkovChain> chain;
  std::shared_ptr<Vocabulary> vocab;
  std::vector<TokenSequence> train;
  std::vector<TokenSequence> heldout;
  std::map<int, LanguageModelHandle> plain;
  std::map<int, LanguageModelHandle> fim;
};

// Trains plain models for `plain_orders` and infilling models for
// `fim_orders` on the bundled corpus for `seed`.
World make_world(std::uint64_t seed, const std::vector<int>& plain_orders,
                 const std::vector<int>& fim_orders);
// Same for an arbitrary chain; the chain seed is spec.seed.
World make_world(const MarkovSpec& spec, const std::vector<int>& plain_orders,
                 const std::vector<int>& fim_orders);

// Fresh documents from the world's chain, independent of the corpus.
std::vector<TokenSequence> fresh_documents(const World& w, std::size_t count, std::uint64_t seed);

// Swaps `swaps` random pairs of distinct positions holding different tokens.
TokenSequence random_swaps(const TokenSequence& s, std::size_t swaps, std::uint64_t seed);

}  // namespace cdm::desk
