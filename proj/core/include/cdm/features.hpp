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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cdm/momentum.hpp"
#include "cdm/token_sequence.hpp"

namespace cdm {

struct FeatureConfig {
  int hash_bits = 16;
  std::uint64_t hash_seed = 0x5eed;
  int max_ngram = 3;

  std::size_t hashed_dim() const { return std::size_t{1} << hash_bits; }
};

// Dense block: mean, min, max, stddev, final, fraction of negative steps
// of the momentum trace, then the length-normalized amateur log-probability.
inline constexpr std::size_t kDenseFeatures = 7;

struct FeatureVector {
  std::array<double, kDenseFeatures> dense{};
  // Hashed token n-gram counts (n = 1..max_ngram), sorted by index, no
  // duplicate indices.
  std::vector<std::pair<std::uint32_t, double>> hashed;
};

class Featurizer {
 public:
  // Binds the feature layout to one contrast pair; the compatibility hash
  // covers both the layout and the pair identities.
  Featurizer(const ContrastPair& pair, FeatureConfig config);

  FeatureVector featurize(const TokenSequence& s) const;

  const FeatureConfig& config() const { return config_; }
  std::size_t dimension() const { return kDenseFeatures + config_.hashed_dim(); }
  std::uint64_t config_hash() const { return config_hash_; }

 private:
  const ContrastPair& pair_;
  FeatureConfig config_;
  std::uint64_t config_hash_;
};

FeatureVector featurize(const ContrastPair& pair, const TokenSequence& s,
                        const FeatureConfig& config = {});

}  // namespace cdm
