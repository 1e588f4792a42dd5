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

#include "cdm/audit.hpp"

#include "json.hpp"

#include "cdm/error.hpp"

namespace cdm {

AuditReport partial_order_audit(std::span<const LanguageModelHandle> family,
                                std::span<const TokenSequence> heldout) {
  if (family.empty()) throw ArgumentError("audit requires at least one model");
  if (heldout.empty()) throw ArgumentError("audit requires a held-out corpus");
  const auto fp = family.front()->vocabulary().fingerprint();
  for (const auto& m : family) {
    if (m->vocabulary().fingerprint() != fp) {
      throw ConfigurationError("model '" + m->identity() + "' does not share the family vocabulary");
    }
  }
  AuditReport report;
  for (const auto& m : family) {
    report.entries.push_back({m->identity(), perplexity(*m, heldout)});
  }
  if (family.size() == 1) {
    report.warnings.push_back("single-model family: ordering is vacuous");
  }
  for (std::size_t i = 0; i + 1 < report.entries.size(); ++i) {
    const double lo = report.entries[i].perplexity;
    const double hi = report.entries[i + 1].perplexity;
    if (!(hi < lo)) report.violations.push_back({i, i + 1, lo, hi});
  }
  report.passed = report.violations.empty();
  return report;
}

std::string AuditReport::to_json() const {
  nlohmann::ordered_json j;
  j["passed"] = passed;
  j["models"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    j["models"].push_back({{"identity", e.identity}, {"perplexity", e.perplexity}});
  }
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations) {
    j["violations"].push_back({{"lower", entries[v.lower].identity},
                               {"higher", entries[v.higher].identity},
                               {"lower_perplexity", v.lower_perplexity},
                               {"higher_perplexity", v.higher_perplexity}});
  }
  j["warnings"] = warnings;
  return j.dump(2);
}

}  // namespace cdm
