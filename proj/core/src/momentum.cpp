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

#include "cdm/momentum.hpp"

#include <algorithm>
#include <cmath>

#include "cdm/error.hpp"

namespace cdm {

ContrastPair::ContrastPair(LanguageModelHandle expert, LanguageModelHandle amateur,
                           bool allow_identical)
    : expert_(std::move(expert)), amateur_(std::move(amateur)) {
  if (!expert_ || !amateur_) throw ConfigurationError("contrast pair requires two models");
  if (expert_->vocabulary().fingerprint() != amateur_->vocabulary().fingerprint()) {
    throw ConfigurationError("expert '" + expert_->identity() + "' and amateur '" +
                             amateur_->identity() + "' do not share a vocabulary");
  }
  if (!allow_identical && expert_->identity() == amateur_->identity()) {
    throw ConfigurationError("expert and amateur have the same identity '" +
                             expert_->identity() + "'");
  }
}

double MomentumTrace::sum() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.momentum;
  return total;
}

std::vector<double> MomentumTrace::values() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.momentum);
  return out;
}

MomentumTrace momentum_trace(const ContrastPair& pair, const TokenSequence& s, std::string id) {
  if (s.empty()) throw ArgumentError("momentum trace requires a non-empty sequence");
  const auto& vocab = pair.vocabulary();
  for (TokenId t : s.ids) {
    if (!vocab.contains(t)) {
      throw ConfigurationError("sequence token id " + std::to_string(t) +
                               " is outside the pair's vocabulary");
    }
  }
  MomentumTrace trace;
  trace.id = std::move(id);
  trace.steps.reserve(s.size() + 1);
  std::span<const TokenId> ids(s.ids);
  for (std::size_t t = 0; t <= ids.size(); ++t) {
    const TokenId token = t < ids.size() ? ids[t] : Vocabulary::kEos;
    const auto context = ids.first(t);
    MomentumStep step;
    step.pos = t;
    step.token = token;
    step.lp_expert = pair.expert().next_logprob(context, token);
    step.lp_amateur = pair.amateur().next_logprob(context, token);
    step.momentum = step.lp_expert - step.lp_amateur;
    trace.steps.push_back(step);
  }
  return trace;
}

const std::array<const char*, TraceSummary::kSize>& TraceSummary::names() {
  static const std::array<const char*, kSize> kNames = {
      "mean", "min", "max", "stddev", "final", "fraction_negative", "length"};
  return kNames;
}

double stable_mean(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("mean of an empty sequence");
  // Neumaier summation.
  double sum = 0.0, comp = 0.0;
  double lo = values[0], hi = values[0];
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = (sum + comp) / static_cast<double>(values.size());
  return std::clamp(mean, lo, hi);
}

TraceSummary summarize(const MomentumTrace& trace) {
  if (trace.empty()) throw ArgumentError("cannot summarize an empty trace");
  const auto values = trace.values();
  TraceSummary s;
  s.mean = stable_mean(values);
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double var = 0.0;
  std::size_t negative = 0;
  for (double v : values) {
    var += (v - s.mean) * (v - s.mean);
    if (v < 0.0) ++negative;
  }
  const auto n = static_cast<double>(values.size());
  s.stddev = std::sqrt(var / n);
  s.final = values.back();
  s.fraction_negative = static_cast<double>(negative) / n;
  s.length = n;
  return s;
}

}  // namespace cdm
