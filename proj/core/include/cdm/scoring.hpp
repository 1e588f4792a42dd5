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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdm/corpus.hpp"
#include "cdm/momentum.hpp"
#include "cdm/pooling.hpp"

namespace cdm {

struct ScoringOptions {
  PoolingStrategy strategy = PoolingStrategy::kAvg;
  const PoolerModel* pooler = nullptr;  // required for kClassifier
  std::size_t jobs = 1;
  TokenizerOptions tokenizer;
  // JSONL file of completed scores. Existing lines are reused and new
  // scores are appended in record order.
  std::optional<std::filesystem::path> checkpoint;
  double oov_warning_rate = 0.05;
  int record_retries = 1;
  double max_skip_fraction = 0.10;
};

struct ScoringResult {
  std::vector<PooledScore> scores;  // dataset order, skipped records omitted
  std::vector<std::string> skipped_ids;
  std::vector<std::string> warnings;
  std::size_t resumed = 0;  // scores taken from the checkpoint
  double oov_rate = 0.0;
};

// Discriminative scoring: tokenize (OOV -> unknown marker), trace, pool.
// Transport failures are retried per record, then skipped; more than
// max_skip_fraction skips throws RunError.
ScoringResult score_dataset(const ContrastPair& pair, std::span<const Document> dataset,
                            const ScoringOptions& options);

std::string pooled_score_json(const PooledScore& s);
std::string trace_json(const MomentumTrace& trace, const Vocabulary& vocab);

}  // namespace cdm
