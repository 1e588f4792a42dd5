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

#include "cdm/corpus.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include "json.hpp"

#include "cdm/error.hpp"

namespace cdm {

namespace {

using nlohmann::json;

bool looks_like_jsonl(const std::filesystem::path& path, std::istream& in) {
  if (path.extension() == ".jsonl") return true;
  const auto pos = in.tellg();
  char c = 0;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  in.clear();
  in.seekg(pos);
  return c == '{';
}

bool is_blank(const std::string& line) {
  for (unsigned char c : line) {
    if (!std::isspace(c)) return false;
  }
  return true;
}

Document document_from_json(const json& j, std::size_t line_no) {
  Document doc;
  const std::string where = "line " + std::to_string(line_no);
  if (!j.is_object()) throw IngestionError(where + ": expected a JSON object");
  if (j.contains("id")) {
    if (j["id"].is_string()) {
      doc.id = j["id"].get<std::string>();
    } else if (j["id"].is_number_integer()) {
      doc.id = std::to_string(j["id"].get<long long>());
    } else {
      throw IngestionError(where + ": \"id\" must be a string");
    }
  } else {
    doc.id = std::to_string(line_no);
  }
  if (j.contains("turns") && !j["turns"].is_null()) {
    if (!j["turns"].is_array()) throw IngestionError(where + ": \"turns\" must be a list");
    for (const auto& t : j["turns"]) {
      if (!t.is_string()) throw IngestionError(where + ": turns must be strings");
      doc.turns.push_back(t.get<std::string>());
    }
  }
  if (j.contains("text") && !j["text"].is_null()) {
    if (!j["text"].is_string()) throw IngestionError(where + ": \"text\" must be a string");
    doc.text = j["text"].get<std::string>();
  }
  if (doc.text.empty() && doc.turns.empty()) {
    throw IngestionError(where + ": record has neither \"text\" nor \"turns\"");
  }
  return doc;
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    f(line, line_no);
  }
}

template <typename Vocab>
TokenSequence encode_document_impl(Vocab& vocab, const Document& doc, OovPolicy policy,
                                   const TokenizerOptions& opts, EncodeStats* stats) {
  if (!doc.has_turns()) return encode_text(vocab, doc.text, policy, opts, stats);
  std::string joined;
  for (std::size_t i = 0; i < doc.turns.size(); ++i) {
    if (i > 0) joined += " <sep> ";
    joined += doc.turns[i];
  }
  return encode_text(vocab, joined, policy, opts, stats);
}

}  // namespace

std::vector<Document> read_documents(const std::filesystem::path& path) {
  std::ifstream probe(path);
  if (!probe) throw ArgumentError("cannot open " + path.string());
  const bool jsonl = looks_like_jsonl(path, probe);
  probe.close();
  std::vector<Document> docs;
  std::set<std::string> seen;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    Document doc;
    if (jsonl) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
      doc = document_from_json(j, line_no);
    } else {
      doc.id = std::to_string(line_no);
      doc.text = line;
    }
    if (!seen.insert(doc.id).second) throw IngestionError("duplicate document id '" + doc.id + "'");
    docs.push_back(std::move(doc));
  });
  return docs;
}

TokenSequence encode_document(Vocabulary& vocab, const Document& doc, OovPolicy policy,
                              const TokenizerOptions& opts, EncodeStats* stats) {
  return encode_document_impl(vocab, doc, policy, opts, stats);
}

TokenSequence encode_document(const Vocabulary& vocab, const Document& doc, OovPolicy policy,
                              const TokenizerOptions& opts, EncodeStats* stats) {
  return encode_document_impl(vocab, doc, policy, opts, stats);
}

void AnnotatedDataset::validate() const {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.doc.id).second) throw ArgumentError("duplicate record id '" + r.doc.id + "'");
    if (r.scores.empty()) throw ArgumentError("record '" + r.doc.id + "' has no aspect scores");
    for (const auto& [aspect, v] : r.scores) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ArgumentError("record '" + r.doc.id + "' aspect '" + aspect + "' score outside [0, 1]");
      }
    }
  }
}

AnnotatedDataset read_annotated_dataset(const std::filesystem::path& path) {
  AnnotatedDataset ds;
  ds.name = path.stem().string();
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    AnnotatedRecord r;
    r.doc = document_from_json(j, line_no);
    if (!j.contains("scores") || !j["scores"].is_object()) {
      throw IngestionError("line " + std::to_string(line_no) + ": missing \"scores\" object");
    }
    for (const auto& [aspect, v] : j["scores"].items()) {
      if (!v.is_number()) {
        throw IngestionError("line " + std::to_string(line_no) + ": score for '" + aspect +
                             "' is not a number");
      }
      r.scores[aspect] = v.get<double>();
    }
    ds.records.push_back(std::move(r));
  });
  ds.validate();
  return ds;
}

}  // namespace cdm
