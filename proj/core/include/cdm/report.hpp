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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdm/corpus.hpp"

namespace cdm {

struct CorrelationRow {
  std::string metric;
  std::string aspect;
  std::size_t n = 0;
  // Empty when the correlation is undefined (constant input).
  std::optional<double> rho;
  std::optional<double> p_value;
  std::optional<double> p_corrected;
  std::string error;
};

struct CorrelationReport {
  std::string dataset;
  std::size_t family_size = 0;
  std::vector<CorrelationRow> rows;  // sorted by (metric, aspect)

  bool all_defined() const;
  std::string to_json() const;
  std::string to_text() const;  // aligned columns
};

// metric name -> (record id -> score)
using MetricScores = std::map<std::string, std::map<std::string, double>>;

// One row per (metric, aspect) over the records carrying that aspect; the
// Bonferroni family is every row of the report. Throws ArgumentError
// listing the ids a metric is missing (or has in excess).
CorrelationReport evaluate_metrics(const AnnotatedDataset& dataset, const MetricScores& metrics);

}  // namespace cdm
