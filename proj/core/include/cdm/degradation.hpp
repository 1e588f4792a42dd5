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
#include <optional>
#include <span>
#include <vector>

#include "cdm/language_model.hpp"
#include "cdm/momentum.hpp"
#include "cdm/random.hpp"

namespace cdm {

struct DegradationConfig {
  double gamma = 1.0;
  // Keep the smallest set of amateur tokens whose mass reaches top_p before
  // contrasting. Off by default.
  std::optional<double> top_p;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_length = 64;
  // Restrict sampling to content tokens plus the end marker, so reserved
  // markers never appear inside generated text.
  bool content_only = true;

  // Throws ArgumentError for gamma < 0, top_p outside (0, 1], temperature
  // <= 0, or max_length == 0.
  void validate() const;
};

// Per-step degraded distribution
//   log p_n(x) = (1 + gamma) log p_a(x) - gamma log p_e(x) - log Z,
// i.e. the amateur pushed against the contrastive momentum. With gamma == 0
// and no truncation the amateur vector is returned unchanged. Tokens cut by
// top-p get kLogProbFloor.
std::vector<double> degraded_next_dist(const ContrastPair& pair, std::span<const TokenId> context,
                                       const DegradationConfig& cfg);

// The vector actually sampled from: degraded_next_dist with the sampling
// temperature and content-only mask applied, renormalized.
std::vector<double> sampling_dist(const ContrastPair& pair, std::span<const TokenId> context,
                                  const DegradationConfig& cfg);

// Ancestral sampling from the degraded distribution after `context`, until
// the end marker or cfg.max_length tokens.
SampledSequence sample_degraded(const ContrastPair& pair, std::span<const TokenId> context,
                                const DegradationConfig& cfg, Rng& rng);
// Same, with the generator seeded from cfg.seed.
SampledSequence sample_degraded(const ContrastPair& pair, std::span<const TokenId> context,
                                const DegradationConfig& cfg);

// Default sweep grid for gamma.
inline constexpr std::array<double, 5> kGammaSweep = {0.25, 0.5, 1.0, 2.0, 4.0};

}  // namespace cdm
