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

#include "cdm/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cdm/error.hpp"

namespace cdm {

void DegradationConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ArgumentError("gamma must be >= 0");
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0)) throw ArgumentError("top_p must lie in (0, 1]");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ArgumentError("temperature must be > 0");
  }
  if (max_length == 0) throw ArgumentError("max regeneration length must be >= 1");
}

namespace {

// Marks tokens outside the amateur's top-p nucleus.
std::vector<bool> nucleus(std::span<const double> amateur, double top_p) {
  std::vector<std::size_t> order(amateur.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return amateur[a] > amateur[b]; });
  std::vector<bool> keep(amateur.size(), false);
  double mass = 0.0;
  for (std::size_t idx : order) {
    keep[idx] = true;
    mass += std::exp(amateur[idx]);
    if (mass >= top_p) break;
  }
  return keep;
}

}  // namespace

std::vector<double> degraded_next_dist(const ContrastPair& pair, std::span<const TokenId> context,
                                       const DegradationConfig& cfg) {
  cfg.validate();
  std::vector<double> amateur = pair.amateur().next_logprobs(context);
  if (cfg.gamma == 0.0 && !cfg.top_p) return amateur;

  std::vector<bool> keep;
  if (cfg.top_p) keep = nucleus(amateur, *cfg.top_p);
  std::vector<double> out(amateur.size());
  if (cfg.gamma == 0.0) {
    out = amateur;
  } else {
    const std::vector<double> expert = pair.expert().next_logprobs(context);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = (1.0 + cfg.gamma) * amateur[i] - cfg.gamma * expert[i];
    }
  }
  if (!keep.empty()) {
    double kept_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (keep[i]) kept_max = std::max(kept_max, out[i]);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (keep[i]) acc += std::exp(out[i] - kept_max);
    }
    const double z = kept_max + std::log(acc);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = keep[i] ? std::max(kLogProbFloor, out[i] - z) : kLogProbFloor;
    }
    return out;
  }
  const double z = logsumexp(out);
  for (auto& v : out) v = std::max(kLogProbFloor, v - z);
  return out;
}

std::vector<double> sampling_dist(const ContrastPair& pair, std::span<const TokenId> context,
                                  const DegradationConfig& cfg) {
  std::vector<double> lp = degraded_next_dist(pair, context, cfg);
  if (!cfg.content_only && cfg.temperature == 1.0) return lp;
  std::vector<double> out(lp.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    if (cfg.content_only && Vocabulary::is_reserved(id) && id != Vocabulary::kEos) continue;
    out[i] = lp[i] / cfg.temperature;
  }
  const double z = logsumexp(out);
  for (auto& v : out) {
    // Masked tokens stay at -inf so they can never be drawn.
    if (std::isfinite(v)) v -= z;
  }
  return out;
}

SampledSequence sample_degraded(const ContrastPair& pair, std::span<const TokenId> context,
                                const DegradationConfig& cfg, Rng& rng) {
  cfg.validate();
  SampledSequence out;
  std::vector<TokenId> ctx(context.begin(), context.end());
  while (out.tokens.size() < cfg.max_length) {
    const auto lp = sampling_dist(pair, ctx, cfg);
    const TokenId next = sample_index(lp, rng);
    if (next == Vocabulary::kEos) return out;
    out.tokens.push_back(next);
    ctx.push_back(next);
  }
  out.truncated = true;
  return out;
}

SampledSequence sample_degraded(const ContrastPair& pair, std::span<const TokenId> context,
                                const DegradationConfig& cfg) {
  Rng rng(cfg.seed);
  return sample_degraded(pair, context, cfg, rng);
}

}  // namespace cdm
