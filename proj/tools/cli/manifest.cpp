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

#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"
#include "json.hpp"

#ifndef CDM_VERSION
#define CDM_VERSION "unknown"
#endif

namespace cdm::cli {
namespace {

const std::set<std::string> kExcluded = {"--help", "--out-dir", "--jobs", "--log-level", "--config"};

std::string joined(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ",";
    out += parts[i];
  }
  return out;
}

}  // namespace

Manifest::Manifest(const CLI::App& command, std::filesystem::path out_dir)
    : command_(command.get_name()), out_dir_(std::move(out_dir)) {
  for (const CLI::Option* opt : command.get_options()) {
    const std::string longest = "--" + opt->get_single_name();
    if (kExcluded.count(longest) != 0U || opt->get_single_name().empty()) continue;
    std::string value = opt->count() > 0 ? joined(opt->results()) : opt->get_default_str();
    if (opt->get_expected_max() == 0 && opt->count() == 0) value = "false";
    config_.emplace_back(opt->get_single_name(), value);
  }
  std::sort(config_.begin(), config_.end());
}

void Manifest::add_seed(const std::string& name, std::uint64_t seed) { seeds_.emplace_back(name, seed); }

void Manifest::add_input(const std::filesystem::path& path) {
  inputs_.push_back(path.string() + " " + file_digest(path));
}

void Manifest::add_output(const std::string& name) { outputs_.push_back(name); }

void Manifest::add_stage(const std::string& stage, const std::string& status) { stages_.emplace_back(stage, status); }

std::string Manifest::config_hash() const {
  Fnv1a h;
  h.update(command_);
  for (const auto& [k, v] : config_) {
    h.update("\n");
    h.update(k);
    h.update("=");
    h.update(v);
  }
  return to_hex(h.digest());
}

void Manifest::write(double wall_seconds) const {
  nlohmann::ordered_json doc;
  doc["tool"] = "cdm";
  doc["version"] = CDM_VERSION;
  doc["command"] = command_;
  doc["config_hash"] = config_hash();
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_) cfg[k] = v;
  doc["config"] = std::move(cfg);
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  for (const auto& [k, v] : seeds_) seeds[k] = v;
  doc["seeds"] = std::move(seeds);
  doc["inputs"] = inputs_;
  auto outputs = nlohmann::ordered_json::array();
  for (const auto& name : outputs_) {
    outputs.push_back({{"file", name}, {"fnv1a", file_digest(out_dir_ / name)}});
  }
  doc["outputs"] = std::move(outputs);
  auto stages = nlohmann::ordered_json::array();
  for (const auto& [stage, status] : stages_) stages.push_back({{"stage", stage}, {"status", status}});
  doc["stages"] = std::move(stages);

  std::ofstream out(out_dir_ / "manifest.json");
  if (!out) throw IngestionError("cannot write " + (out_dir_ / "manifest.json").string());
  out << doc.dump(2) << "\n";
  std::ofstream timing(out_dir_ / "timing.json");
  nlohmann::ordered_json t;
  t["command"] = command_;
  t["wall_seconds"] = wall_seconds;
  timing << t.dump(2) << "\n";
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read " + path.string());
  Fnv1a h;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  }
  return to_hex(h.digest());
}

}  // namespace cdm::cli
