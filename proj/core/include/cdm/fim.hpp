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

#include <span>
#include <vector>

#include "cdm/random.hpp"
#include "cdm/token_sequence.hpp"

namespace cdm {

// Prefix-suffix-middle rearrangement:
//   PRE prefix SUF suffix MID middle EOS
// Turn boundaries are not carried into the rearranged sequence.
TokenSequence fim_transform(const TokenSequence& s, Span span);

struct FimParts {
  TokenSequence original;
  Span span;
};

// Inverse of fim_transform. Throws ArgumentError when the sentinels are
// missing or out of order.
FimParts fim_inverse(const TokenSequence& fim);

// Left-to-right prompt for infilling `span`: PRE prefix SUF suffix MID.
std::vector<TokenId> fim_prompt(std::span<const TokenId> ids, Span span);

// Training corpus for infilling models: every plain sequence plus
// `copies` rearranged variants with random spans. The trailing end marker
// of each rearranged variant is dropped because training appends one.
std::vector<TokenSequence> make_fim_training_corpus(std::span<const TokenSequence> corpus,
                                                    int copies, Rng& rng);

}  // namespace cdm
