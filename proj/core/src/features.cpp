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

#include "cdm/features.hpp"

#include <map>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"

namespace cdm {

Featurizer::Featurizer(const ContrastPair& pair, FeatureConfig config)
    : pair_(pair), config_(config) {
  if (config_.hash_bits < 1 || config_.hash_bits > 24) throw ArgumentError("hash_bits must be in [1, 24]");
  if (config_.max_ngram < 1) throw ArgumentError("max_ngram must be >= 1");
  Fnv1a h;
  h.update("cdm-features-v1|");
  h.update_u64(static_cast<std::uint64_t>(config_.hash_bits));
  h.update_u64(config_.hash_seed);
  h.update_u64(static_cast<std::uint64_t>(config_.max_ngram));
  h.update(pair_.expert().identity());
  h.update("|");
  h.update(pair_.amateur().identity());
  h.update("|");
  h.update_u64(pair_.vocabulary().fingerprint());
  config_hash_ = h.digest();
}

FeatureVector Featurizer::featurize(const TokenSequence& s) const {
  MomentumTrace trace;
  if (s.empty()) {
    // Only the end-marker step; regenerated negatives can be empty.
    MomentumStep step;
    step.token = Vocabulary::kEos;
    step.lp_expert = pair_.expert().next_logprob({}, Vocabulary::kEos);
    step.lp_amateur = pair_.amateur().next_logprob({}, Vocabulary::kEos);
    step.momentum = step.lp_expert - step.lp_amateur;
    trace.steps.push_back(step);
  } else {
    trace = momentum_trace(pair_, s);
  }
  const TraceSummary summary = summarize(trace);
  FeatureVector fv;
  fv.dense = {summary.mean,  summary.min,   summary.max, summary.stddev,
              summary.final, summary.fraction_negative, 0.0};
  double amateur_total = 0.0;
  for (const auto& step : trace.steps) amateur_total += step.lp_amateur;
  fv.dense[6] = amateur_total / static_cast<double>(trace.size());

  const std::uint32_t mask = static_cast<std::uint32_t>(config_.hashed_dim() - 1);
  std::map<std::uint32_t, double> counts;
  const auto max_n = static_cast<std::size_t>(config_.max_ngram);
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      Fnv1a h(Fnv1a::kOffset ^ config_.hash_seed);
      h.update_u64(n);
      for (std::size_t k = 0; k < n; ++k) h.update_u64(s.ids[i + k]);
      counts[static_cast<std::uint32_t>(h.digest()) & mask] += 1.0;
    }
  }
  fv.hashed.assign(counts.begin(), counts.end());
  return fv;
}

FeatureVector featurize(const ContrastPair& pair, const TokenSequence& s, const FeatureConfig& config) {
  return Featurizer(pair, config).featurize(s);
}

}  // namespace cdm
