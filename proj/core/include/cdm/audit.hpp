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
#include <string>
#include <vector>

#include "cdm/language_model.hpp"
#include "cdm/token_sequence.hpp"

namespace cdm {

struct AuditEntry {
  std::string identity;
  double perplexity = 0.0;
};

struct AuditViolation {
  std::size_t lower = 0;   // index of the smaller-capacity model
  std::size_t higher = 0;  // index of the larger-capacity model
  double lower_perplexity = 0.0;
  double higher_perplexity = 0.0;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  std::vector<AuditViolation> violations;
  std::vector<std::string> warnings;
  bool passed = false;

  std::string to_json() const;
};

// Checks that held-out perplexity strictly decreases along a family sorted
// by increasing capacity. Violations are reported, not thrown. Throws
// ArgumentError on an empty family or held-out set, ConfigurationError on a
// vocabulary mismatch.
AuditReport partial_order_audit(std::span<const LanguageModelHandle> family,
                                std::span<const TokenSequence> heldout);

}  // namespace cdm
