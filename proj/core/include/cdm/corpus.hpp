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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdm/token_sequence.hpp"
#include "cdm/vocabulary.hpp"

namespace cdm {

// One ingested document: free text or a list of turns.
struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> turns;

  bool has_turns() const { return !turns.empty(); }
};

// Reads one document per line from a text file, or JSONL records
// {"id", "text", "turns"} when the file ends in .jsonl or its first
// non-blank character is '{'. Plain-text documents get ids "1", "2", ...
// (line numbers). Blank lines are skipped.
std::vector<Document> read_documents(const std::filesystem::path& path);

TokenSequence encode_document(Vocabulary& vocab, const Document& doc, OovPolicy policy,
                              const TokenizerOptions& opts = {}, EncodeStats* stats = nullptr);
TokenSequence encode_document(const Vocabulary& vocab, const Document& doc, OovPolicy policy,
                              const TokenizerOptions& opts = {}, EncodeStats* stats = nullptr);

struct AnnotatedRecord {
  Document doc;
  std::map<std::string, double> scores;  // aspect -> human score in [0, 1]
};

struct AnnotatedDataset {
  std::string name;
  std::vector<AnnotatedRecord> records;

  // Unique ids, at least one aspect per record, scores in [0, 1].
  void validate() const;
};

// JSONL {"id", "text" | "turns", "scores": {aspect: float}}.
AnnotatedDataset read_annotated_dataset(const std::filesystem::path& path);

}  // namespace cdm
