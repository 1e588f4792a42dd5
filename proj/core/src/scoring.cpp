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

#include "cdm/scoring.hpp"

#include <fstream>
#include <mutex>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "cdm/error.hpp"
#include "cdm/parallel.hpp"
#include "json.hpp"

namespace cdm {
namespace {

struct Slot {
  std::optional<PooledScore> score;
  bool from_checkpoint = false;
  bool done = false;
  std::string skip_reason;
};

std::unordered_map<std::string, PooledScore> read_checkpoint(const std::filesystem::path& path,
                                                             PoolingStrategy strategy,
                                                             std::vector<std::string>& lines) {
  std::unordered_map<std::string, PooledScore> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PooledScore s;
      s.id = j.at("id").get<std::string>();
      s.strategy = parse_pooling(j.at("strategy").get<std::string>());
      s.score = j.at("score").get<double>();
      s.length = j.at("len").get<std::size_t>();
      if (s.strategy != strategy) continue;
      if (out.emplace(s.id, s).second) lines.push_back(line);
    } catch (const std::exception&) {
      // A partially written trailing line from an interrupted run.
      spdlog::warn("checkpoint {}: ignoring unreadable line", path.string());
    }
  }
  return out;
}

}  // namespace

std::string pooled_score_json(const PooledScore& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["strategy"] = pooling_name(s.strategy);
  j["score"] = s.score;
  j["len"] = s.length;
  return j.dump();
}

std::string trace_json(const MomentumTrace& trace, const Vocabulary& vocab) {
  nlohmann::ordered_json j;
  j["id"] = trace.id;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : trace.steps) {
    nlohmann::ordered_json step;
    step["pos"] = s.pos;
    step["token"] = vocab.token(s.token);
    step["lp_expert"] = s.lp_expert;
    step["lp_amateur"] = s.lp_amateur;
    step["momentum"] = s.momentum;
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return j.dump();
}

ScoringResult score_dataset(const ContrastPair& pair, std::span<const Document> dataset,
                            const ScoringOptions& options) {
  if (options.strategy == PoolingStrategy::kClassifier && options.pooler == nullptr) {
    throw ArgumentError("classifier pooling requires a pooler model");
  }
  if (options.record_retries < 0) throw ArgumentError("record_retries must be non-negative");
  {
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& d : dataset) {
      if (!seen.emplace(d.id, 0).second) throw IngestionError("duplicate record id '" + d.id + "'");
    }
  }
  ScoringResult result;
  const auto& vocab = pair.vocabulary();

  // Tokenization is cheap and deterministic; do it up front for the OOV rate.
  std::vector<TokenSequence> seqs(dataset.size());
  EncodeStats stats;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    seqs[i] = encode_document(vocab, dataset[i], OovPolicy::kUnknown, options.tokenizer, &stats);
  }
  result.oov_rate = stats.tokens == 0 ? 0.0 : static_cast<double>(stats.oov) / static_cast<double>(stats.tokens);
  if (result.oov_rate > options.oov_warning_rate) {
    result.warnings.push_back("out-of-vocabulary rate " + std::to_string(result.oov_rate) +
                              " exceeds " + std::to_string(options.oov_warning_rate));
    spdlog::warn("score: {}", result.warnings.back());
  }

  std::vector<Slot> slots(dataset.size());
  std::ofstream checkpoint;
  if (options.checkpoint) {
    std::vector<std::string> kept;
    const auto done = read_checkpoint(*options.checkpoint, options.strategy, kept);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      auto it = done.find(dataset[i].id);
      if (it == done.end()) continue;
      slots[i].score = it->second;
      slots[i].from_checkpoint = true;
      slots[i].done = true;
      ++result.resumed;
    }
    // Rewrite without any torn line, then append in record order.
    checkpoint.open(*options.checkpoint, std::ios::trunc);
    if (!checkpoint) throw IngestionError("cannot write checkpoint " + options.checkpoint->string());
    for (const auto& l : kept) checkpoint << l << '\n';
    checkpoint.flush();
  }

  std::mutex writer_mu;
  std::size_t next_commit = 0;
  auto commit = [&](std::size_t i, Slot slot) {
    std::lock_guard lock(writer_mu);
    slots[i] = std::move(slot);
    slots[i].done = true;
    while (next_commit < slots.size() && slots[next_commit].done) {
      const auto& s = slots[next_commit];
      if (checkpoint.is_open() && s.score && !s.from_checkpoint) {
        checkpoint << pooled_score_json(*s.score) << '\n';
        checkpoint.flush();
      }
      ++next_commit;
    }
  };
  {
    // Commit any resumed prefix.
    std::lock_guard lock(writer_mu);
    while (next_commit < slots.size() && slots[next_commit].done) ++next_commit;
  }

  parallel_for(dataset.size(), options.jobs, [&](std::size_t i) {
    if (slots[i].from_checkpoint) return;
    Slot slot;
    if (seqs[i].empty()) {
      slot.skip_reason = "record has no tokens";
      commit(i, std::move(slot));
      return;
    }
    for (int attempt = 0;; ++attempt) {
      try {
        const auto trace = momentum_trace(pair, seqs[i], dataset[i].id);
        slot.score = options.strategy == PoolingStrategy::kClassifier ? options.pooler->pool(trace)
                                                                      : pool(trace, options.strategy);
        break;
      } catch (const TransportError& e) {
        slot.skip_reason = e.what();
      } catch (const StatusError& e) {
        slot.skip_reason = e.what();
      } catch (const ProtocolError& e) {
        slot.skip_reason = e.what();
      }
      if (attempt >= options.record_retries) break;
    }
    commit(i, std::move(slot));
  });

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].score) {
      result.scores.push_back(*slots[i].score);
    } else {
      result.skipped_ids.push_back(dataset[i].id);
      spdlog::warn("score: skipped record '{}': {}", dataset[i].id, slots[i].skip_reason);
    }
  }
  if (!dataset.empty() && static_cast<double>(result.skipped_ids.size()) >
                              options.max_skip_fraction * static_cast<double>(dataset.size())) {
    throw RunError("skipped " + std::to_string(result.skipped_ids.size()) + " of " +
                   std::to_string(dataset.size()) + " records, above the allowed fraction");
  }
  return result;
}

}  // namespace cdm
