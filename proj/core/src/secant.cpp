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

#include "cdm/secant.hpp"

#include <cmath>
#include <vector>

#include "cdm/error.hpp"

namespace cdm {

double enumeration_size(std::size_t vocab_size, std::size_t max_length) {
  // Sequences ending with the end marker before the cap, plus capped ones.
  const double branch = static_cast<double>(vocab_size) - 1.0;
  double total = 0.0, level = 1.0;
  for (std::size_t l = 0; l < max_length; ++l) {
    total += level;
    level *= branch;
  }
  return total + level;
}

namespace {

struct Enumerator {
  const LanguageModel& p;
  const ContrastPair& pair;
  std::size_t max_length;
  std::vector<TokenId> prefix;
  double value = 0.0;
  std::size_t events = 0;

  void visit(double logp, double momentum) {
    if (prefix.size() == max_length) {
      value += std::exp(logp) * momentum;
      ++events;
      return;
    }
    const auto lp = p.next_logprobs(prefix);
    const auto le = pair.expert().next_logprobs(prefix);
    const auto la = pair.amateur().next_logprobs(prefix);
    for (std::size_t w = 0; w < lp.size(); ++w) {
      const double step_m = le[w] - la[w];
      if (w == Vocabulary::kEos) {
        value += std::exp(logp + lp[w]) * (momentum + step_m);
        ++events;
        continue;
      }
      prefix.push_back(static_cast<TokenId>(w));
      visit(logp + lp[w], momentum + step_m);
      prefix.pop_back();
    }
  }
};

}  // namespace

SecantEstimate secant_estimate_exact(const LanguageModel& p, const ContrastPair& pair,
                                     const EnumerationSpec& spec) {
  if (p.vocabulary().fingerprint() != pair.vocabulary().fingerprint()) {
    throw ConfigurationError("evaluated model does not share the pair's vocabulary");
  }
  const double size = enumeration_size(p.vocabulary().size(), spec.max_length);
  if (size > static_cast<double>(spec.budget)) {
    throw EnumerationBudgetError("enumeration domain holds about " + std::to_string(size) +
                                     " sequences, above the budget of " +
                                     std::to_string(spec.budget),
                                 size);
  }
  Enumerator e{p, pair, spec.max_length, {}, 0.0, 0};
  e.visit(0.0, 0.0);
  SecantEstimate out;
  out.value = e.value;
  out.evaluations = e.events;
  out.exact = true;
  return out;
}

SecantEstimate secant_estimate_monte_carlo(const LanguageModel& p, const ContrastPair& pair,
                                           const MonteCarloSpec& spec) {
  if (spec.samples < 2) throw ArgumentError("Monte-Carlo estimate needs at least 2 samples");
  if (p.vocabulary().fingerprint() != pair.vocabulary().fingerprint()) {
    throw ConfigurationError("evaluated model does not share the pair's vocabulary");
  }
  Rng rng(spec.seed);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const SampledSequence s = sample_sequence(p, {}, spec.max_length, rng);
    std::span<const TokenId> ids(s.tokens);
    double m = 0.0;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      m += pair.expert().next_logprob(ids.first(t), ids[t]) -
           pair.amateur().next_logprob(ids.first(t), ids[t]);
    }
    if (!s.truncated) {
      m += pair.expert().next_logprob(ids, Vocabulary::kEos) -
           pair.amateur().next_logprob(ids, Vocabulary::kEos);
    }
    // Welford update.
    const double delta = m - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (m - mean);
  }
  const auto n = static_cast<double>(spec.samples);
  SecantEstimate out;
  out.value = mean;
  out.standard_error = std::sqrt(m2 / (n - 1.0) / n);
  out.evaluations = spec.samples;
  return out;
}

}  // namespace cdm
