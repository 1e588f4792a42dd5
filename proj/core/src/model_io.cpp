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

#include "cdm/model_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"

namespace cdm {

namespace {

constexpr std::string_view kMagic = "cdm-ngram";
constexpr std::string_view kBodyMarker = "---\n";

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw FormatError("bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw FormatError("bad integer '" + s + "'");
  return v;
}

std::string serialize_body(const NgramModel& model) {
  std::ostringstream out;
  out << "identity " << model.identity() << '\n';
  out << "fim " << (model.fim_capable() ? 1 : 0) << '\n';
  out << "additive " << hex_double(model.smoothing().additive) << '\n';
  out << "weights " << model.smoothing().weights.size();
  for (double w : model.smoothing().weights) out << ' ' << hex_double(w);
  out << '\n';
  const auto& vocab = model.vocabulary();
  out << "vocab " << vocab.size() << '\n';
  for (const auto& t : vocab.tokens()) out << t << '\n';
  for (std::size_t k = 0; k < model.tables().size(); ++k) {
    const auto& table = model.tables()[k];
    std::vector<const ContextKey*> keys;
    keys.reserve(table.size());
    for (const auto& [key, stats] : table) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(), [](const ContextKey* a, const ContextKey* b) { return *a < *b; });
    out << "table " << (k + 1) << ' ' << keys.size() << '\n';
    for (const ContextKey* key : keys) {
      const auto& stats = table.at(*key);
      for (TokenId t : *key) out << t << ' ';
      out << ';';
      for (const auto& [tok, c] : stats.counts) out << ' ' << tok << ':' << c;
      out << '\n';
    }
  }
  return out.str();
}

class LineReader {
 public:
  explicit LineReader(std::string_view data) : data_(data) {}

  std::string next() {
    if (pos_ >= data_.size()) throw FormatError("unexpected end of model body");
    const std::size_t nl = data_.find('\n', pos_);
    if (nl == std::string_view::npos) throw FormatError("unterminated line in model body");
    std::string line(data_.substr(pos_, nl - pos_));
    pos_ = nl + 1;
    return line;
  }

  // "<key> <rest>" -> rest, checking the key.
  std::string field(std::string_view key) {
    std::string line = next();
    if (line.size() < key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != ' ') {
      throw FormatError("expected field '" + std::string(key) + "'");
    }
    return line.substr(key.size() + 1);
  }

  bool done() const { return pos_ >= data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

NgramModel parse_body(std::string_view body, int order, std::size_t vocab_size) {
  LineReader in(body);
  std::string identity = in.field("identity");
  const bool fim = parse_u64(in.field("fim")) != 0;
  SmoothingConfig smoothing;
  smoothing.additive = parse_double(in.field("additive"));
  {
    std::istringstream ws(in.field("weights"));
    std::string tok;
    ws >> tok;
    const auto n = parse_u64(tok);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!(ws >> tok)) throw FormatError("truncated weight list");
      smoothing.weights.push_back(parse_double(tok));
    }
  }
  const auto v = parse_u64(in.field("vocab"));
  if (v != vocab_size) throw FormatError("vocabulary size disagrees with header");
  std::vector<std::string> tokens;
  tokens.reserve(v);
  for (std::uint64_t i = 0; i < v; ++i) tokens.push_back(in.next());
  auto vocab = std::make_shared<Vocabulary>(Vocabulary::from_tokens(tokens));
  if (vocab->size() != v || vocab->tokens() != tokens) {
    throw FormatError("vocabulary block is not a valid reserved-first token list");
  }

  std::vector<NgramModel::OrderTable> tables(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    std::istringstream hs(in.field("table"));
    std::uint64_t table_order = 0, entries = 0;
    hs >> table_order >> entries;
    if (static_cast<int>(table_order) != k) throw FormatError("count tables out of order");
    auto& table = tables[static_cast<std::size_t>(k - 1)];
    table.reserve(entries);
    for (std::uint64_t e = 0; e < entries; ++e) {
      const std::string line = in.next();
      const auto semi = line.find(';');
      if (semi == std::string::npos) throw FormatError("malformed count line");
      ContextKey key;
      std::istringstream ks(line.substr(0, semi));
      std::string tok;
      while (ks >> tok) key.push_back(static_cast<TokenId>(parse_u64(tok)));
      if (key.size() != static_cast<std::size_t>(k - 1)) throw FormatError("context length mismatch");
      ContextStats stats;
      std::istringstream cs(line.substr(semi + 1));
      while (cs >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw FormatError("malformed count entry");
        const auto id = static_cast<TokenId>(parse_u64(tok.substr(0, colon)));
        const auto c = parse_u64(tok.substr(colon + 1));
        if (id >= v) throw FormatError("count for unknown token id");
        stats.counts.emplace_back(id, c);
        stats.total += c;
      }
      table.emplace(std::move(key), std::move(stats));
    }
  }
  if (!in.done()) throw FormatError("trailing data after count tables");
  return NgramModel(std::move(vocab), order, std::move(smoothing), std::move(tables), fim,
                    std::move(identity));
}

}  // namespace

std::string serialize_model(const NgramModel& model) {
  const std::string body = serialize_body(model);
  std::ostringstream out;
  out << kMagic << '\n'
      << "format-version " << kModelFormatVersion << '\n'
      << "order " << model.order() << '\n'
      << "vocab-size " << model.vocabulary().size() << '\n'
      << "checksum " << to_hex(fnv1a(body)) << '\n'
      << "body-bytes " << body.size() << '\n'
      << kBodyMarker << body;
  return out.str();
}

NgramModel deserialize_model(const std::string& data) {
  const std::size_t first_nl = data.find('\n');
  if (data.compare(0, kMagic.size(), kMagic) != 0 ||
      (first_nl != std::string::npos && first_nl != kMagic.size())) {
    throw FormatError("not a cdm n-gram model file (bad magic header)");
  }
  const std::size_t marker = data.find("\n---\n");
  if (first_nl == std::string::npos || marker == std::string::npos) {
    throw ChecksumError("model file is truncated (header incomplete)");
  }
  LineReader header(std::string_view(data).substr(first_nl + 1, marker - first_nl));
  int order = 0;
  std::size_t vocab_size = 0, body_bytes = 0;
  std::string checksum;
  {
    const auto version = parse_u64(header.field("format-version"));
    if (version != static_cast<std::uint64_t>(kModelFormatVersion)) {
      throw FormatError("unsupported model format version " + std::to_string(version) +
                        " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    order = static_cast<int>(parse_u64(header.field("order")));
    vocab_size = parse_u64(header.field("vocab-size"));
    checksum = header.field("checksum");
    body_bytes = parse_u64(header.field("body-bytes"));
  }
  const std::string body = data.substr(marker + 5);
  if (body.size() != body_bytes || to_hex(fnv1a(body)) != checksum) {
    throw ChecksumError("model body fails its checksum (file truncated or corrupted)");
  }
  if (order < 1) throw FormatError("invalid order in header");
  return parse_body(body, order, vocab_size);
}

void save_model(const NgramModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write model file " + path.string());
  out << serialize_model(model);
  if (!out) throw ArgumentError("failed writing model file " + path.string());
}

NgramModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace cdm
