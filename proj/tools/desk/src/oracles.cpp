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

#include "oracles.hpp"

#include <cmath>
#include <vector>

namespace cdm::desk {
namespace {

double chain_logprob(const LanguageModel& m, const std::vector<TokenId>& seq, bool terminated) {
  double lp = 0.0;
  std::vector<TokenId> ctx;
  for (TokenId t : seq) {
    lp += m.next_logprobs(ctx)[t];
    ctx.push_back(t);
  }
  if (terminated) lp += m.next_logprobs(ctx)[Vocabulary::kEos];
  return lp;
}

}  // namespace

Divergences brute_force_divergences(const LanguageModel& expert, const LanguageModel& amateur,
                                    std::size_t max_length) {
  const std::size_t v = expert.vocabulary().size();
  std::vector<TokenId> alphabet;
  for (TokenId t = 0; t < v; ++t) {
    if (t != Vocabulary::kEos) alphabet.push_back(t);
  }
  Divergences d;
  for (std::size_t len = 0; len <= max_length; ++len) {
    const bool terminated = len < max_length;
    std::vector<std::size_t> digits(len, 0);
    for (;;) {
      std::vector<TokenId> seq(len);
      for (std::size_t i = 0; i < len; ++i) seq[i] = alphabet[digits[i]];
      const double le = chain_logprob(expert, seq, terminated);
      const double la = chain_logprob(amateur, seq, terminated);
      const double pe = std::exp(le), pa = std::exp(la);
      d.kl_expert_amateur += pe * (le - la);
      d.kl_amateur_expert += pa * (la - le);
      d.symmetrized += (pe - pa) * (le - la);
      std::size_t k = 0;
      while (k < len && ++digits[k] == alphabet.size()) digits[k++] = 0;
      if (k == len) break;
    }
  }
  return d;
}

double naive_spearman(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  auto ranks = [n](std::span<const double> v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double less = 0.0, equal = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) less += 1.0;
        if (v[j] == v[i] && j != i) equal += 1.0;
      }
      r[i] = 1.0 + less + equal / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += rx[i];
    sy += ry[i];
    sxx += rx[i] * rx[i];
    syy += ry[i] * ry[i];
    sxy += rx[i] * ry[i];
  }
  const double nn = static_cast<double>(n);
  return (nn * sxy - sx * sy) / std::sqrt((nn * sxx - sx * sx) * (nn * syy - sy * sy));
}

}  // namespace cdm::desk
