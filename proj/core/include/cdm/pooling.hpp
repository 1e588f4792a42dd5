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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdm/momentum.hpp"

namespace cdm {

enum class PoolingStrategy { kSum, kAvg, kMin, kMax, kClassifier };

const char* pooling_name(PoolingStrategy s);
// Throws ArgumentError on an unknown name.
PoolingStrategy parse_pooling(std::string_view name);

struct PooledScore {
  std::string id;
  PoolingStrategy strategy = PoolingStrategy::kAvg;
  double score = 0.0;
  std::size_t length = 0;
};

// Fixed poolers. avg is the compensated mean clamped into [min, max], and
// sum is defined as avg * len so that sum == avg * len holds exactly.
// Throws ArgumentError for an empty trace or for kClassifier (which needs a
// PoolerModel).
PooledScore pool(const MomentumTrace& trace, PoolingStrategy strategy);
double pool_values(std::span<const double> values, PoolingStrategy strategy);

// Linear map from the trace summary statistics to a target score.
class PoolerModel {
 public:
  double predict(const TraceSummary& summary) const;
  PooledScore pool(const MomentumTrace& trace) const;

  std::array<double, TraceSummary::kSize> weights{};  // on standardized inputs
  double bias = 0.0;
  std::array<double, TraceSummary::kSize> feature_mean{};
  std::array<double, TraceSummary::kSize> feature_scale{};
  double l2 = 0.0;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::string target_source;  // free-form provenance of the targets
};

struct PoolerConfig {
  double l2 = 1e-9;
  std::uint64_t seed = 0;
  std::string target_source = "unspecified";
};

struct PoolerReport {
  double train_rmse = 0.0;
  double train_r2 = 0.0;
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

// Ridge regression (intercept unpenalized) on standardized summaries.
// Rank-deficient inputs get the regularized solution and a warning.
// Throws ArgumentError with fewer than 10 pairs or mismatched sizes.
PoolerModel train_pooler(std::span<const MomentumTrace> traces, std::span<const double> targets,
                         const PoolerConfig& config, PoolerReport* report = nullptr);

std::string serialize_pooler(const PoolerModel& p);
PoolerModel deserialize_pooler(const std::string& data);
void save_pooler(const PoolerModel& p, const std::filesystem::path& path);
PoolerModel load_pooler(const std::filesystem::path& path);

}  // namespace cdm
