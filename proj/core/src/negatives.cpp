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

#include "cdm/negatives.hpp"

#include <optional>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include "cdm/error.hpp"
#include "cdm/fim.hpp"
#include "cdm/parallel.hpp"

namespace cdm {

RegeneratedSpan regenerate_segment(const ContrastPair& pair, const TokenSequence& s, Span span,
                                   const DegradationConfig& cfg, Rng& rng,
                                   RegenerationMode mode) {
  if (span.length == 0) throw ArgumentError("cannot regenerate an empty span");
  if (span.end() > s.size()) throw ArgumentError("regeneration span out of bounds");
  std::vector<TokenId> prompt;
  if (mode == RegenerationMode::kFillInMiddle) {
    if (!pair.fim_capable()) {
      throw CapabilityError(
          "models are not fill-in-the-middle capable; train them on a FIM corpus or use "
          "suffix-blind regeneration (lower fidelity)");
    }
    prompt = fim_prompt(s.ids, span);
  } else {
    prompt.assign(s.ids.begin(), s.ids.begin() + static_cast<std::ptrdiff_t>(span.start));
  }
  DegradationConfig step_cfg = cfg;
  step_cfg.max_length = 2 * span.length;
  const SampledSequence sampled = sample_degraded(pair, prompt, step_cfg, rng);
  return {sampled.tokens, sampled.truncated};
}

namespace {

constexpr const char* kCdmLabel = "cdm";
constexpr const char* kResampleLabel = "resample-baseline";

NegativeSampleRecord build_record(const ContrastPair& pair, const PositiveExample& positive,
                                  const SynthesisOptions& options, const char* label) {
  const StrategyRegistry& registry =
      options.registry ? *options.registry : [] () -> const StrategyRegistry& {
        static const StrategyRegistry kBuiltins = StrategyRegistry::with_builtins();
        return kBuiltins;
      }();
  const auto& vocab = pair.vocabulary();
  positive.seq.validate(vocab);
  Rng rng = Rng::for_task(options.degradation.seed, positive.id);
  const MaskSpec mask = registry.select(options.strategy, positive.seq, rng);

  for (int attempt = 0; attempt < std::max(1, options.max_attempts); ++attempt) {
    TokenSequence current{positive.seq.ids, {}};
    std::vector<EditedSpan> edits;
    std::ptrdiff_t offset = 0;
    // Left to right; each edit sees the ones already applied.
    for (const auto& m : mask.spans) {
      const Span shifted{static_cast<std::size_t>(static_cast<std::ptrdiff_t>(m.span.start) + offset),
                         m.span.length};
      const RegeneratedSpan regen =
          regenerate_segment(pair, current, shifted, options.degradation, rng, options.mode);
      auto first = current.ids.begin() + static_cast<std::ptrdiff_t>(shifted.start);
      current.ids.erase(first, first + static_cast<std::ptrdiff_t>(shifted.length));
      current.ids.insert(current.ids.begin() + static_cast<std::ptrdiff_t>(shifted.start),
                         regen.tokens.begin(), regen.tokens.end());
      offset += static_cast<std::ptrdiff_t>(regen.tokens.size()) -
                static_cast<std::ptrdiff_t>(m.span.length);
      edits.push_back({m.span, regen.tokens.size()});
    }
    if (current.ids == positive.seq.ids) continue;
    assign_turns_from_separators(current);
    NegativeSampleRecord r;
    r.source_id = positive.id;
    r.strategy = label;
    r.mask_strategy = options.strategy;
    r.gamma = options.degradation.gamma;
    r.seed = options.degradation.seed;
    r.edits = std::move(edits);
    r.original_text = decode(vocab, positive.seq.ids);
    r.manipulated_text = decode(vocab, current.ids);
    r.manipulated = std::move(current);
    return r;
  }
  throw RunError("regeneration reproduced the source after " +
                 std::to_string(options.max_attempts) + " attempts");
}

SynthesisResult run_synthesis(const ContrastPair& pair, std::span<const PositiveExample> positives,
                              const SynthesisOptions& options, const char* label) {
  options.degradation.validate();
  SynthesisResult result;
  if (!options.audit_passed) {
    result.warnings.push_back("partial-order audit not confirmed for this pair");
    spdlog::warn("synthesizing negatives without a confirmed partial-order audit");
  }
  std::vector<std::optional<NegativeSampleRecord>> slots(positives.size());
  std::vector<std::string> errors(positives.size());
  parallel_for(positives.size(), options.jobs, [&](std::size_t i) {
    try {
      slots[i] = build_record(pair, positives[i], options, label);
    } catch (const StrategyError&) {
      throw;
    } catch (const CapabilityError&) {
      throw;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < positives.size(); ++i) {
    if (slots[i]) {
      result.records.push_back(std::move(*slots[i]));
    } else {
      spdlog::warn("skipping positive '{}': {}", positives[i].id, errors[i]);
      result.skipped.push_back({positives[i].id, errors[i]});
    }
  }
  if (!positives.empty() &&
      static_cast<double>(result.skipped.size()) >
          options.max_skip_fraction * static_cast<double>(positives.size())) {
    throw RunError(std::to_string(result.skipped.size()) + " of " +
                   std::to_string(positives.size()) + " records skipped during synthesis");
  }
  return result;
}

}  // namespace

SynthesisResult synthesize_negatives(const ContrastPair& pair,
                                     std::span<const PositiveExample> positives,
                                     const SynthesisOptions& options) {
  return run_synthesis(pair, positives, options, kCdmLabel);
}

SynthesisResult resample_baseline(const LanguageModelHandle& amateur,
                                  std::span<const PositiveExample> positives,
                                  const SynthesisOptions& options) {
  // The amateur stands in for both sides; with gamma == 0 the expert slot is
  // never queried.
  const ContrastPair pair(amateur, amateur, /*allow_identical=*/true);
  SynthesisOptions baseline = options;
  baseline.degradation.gamma = 0.0;
  baseline.audit_passed = true;
  return run_synthesis(pair, positives, baseline, kResampleLabel);
}

NegativeSampleRecord replay_negative(const ContrastPair& pair, const PositiveExample& positive,
                                     const SynthesisOptions& options) {
  return build_record(pair, positive, options, kCdmLabel);
}

std::string negative_record_json(const NegativeSampleRecord& r) {
  nlohmann::ordered_json j;
  j["source_id"] = r.source_id;
  j["strategy"] = r.strategy;
  j["mask_strategy"] = r.mask_strategy;
  j["gamma"] = r.gamma;
  j["seed"] = r.seed;
  j["spans"] = nlohmann::ordered_json::array();
  for (const auto& e : r.edits) {
    j["spans"].push_back(
        {{"start", e.original.start}, {"length", e.original.length}, {"regenerated", e.regenerated}});
  }
  j["original_text"] = r.original_text;
  j["manipulated_text"] = r.manipulated_text;
  return j.dump();
}

NegativeSampleRecord parse_negative_record(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("negative record is not JSON: ") + e.what());
  }
  NegativeSampleRecord r;
  try {
    r.source_id = j.at("source_id").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.mask_strategy = j.value("mask_strategy", std::string());
    r.gamma = j.at("gamma").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("spans")) {
      r.edits.push_back({Span{s.at("start").get<std::size_t>(), s.at("length").get<std::size_t>()},
                         s.at("regenerated").get<std::size_t>()});
    }
    r.original_text = j.at("original_text").get<std::string>();
    r.manipulated_text = j.at("manipulated_text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed negative record: ") + e.what());
  }
  return r;
}

}  // namespace cdm
