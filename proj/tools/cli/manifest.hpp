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

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

namespace cdm::cli {

// Run record written beside the outputs. manifest.json is a pure function
// of the resolved configuration and the input/output bytes; wall time goes
// to timing.json so repeated runs give identical manifests.
class Manifest {
 public:
  // Captures every option of `command` except the ones that cannot affect
  // results (output directory, job count, logging, config file path).
  Manifest(const CLI::App& command, std::filesystem::path out_dir);

  void add_seed(const std::string& name, std::uint64_t seed);
  void add_input(const std::filesystem::path& path);
  // `name` is relative to the output directory.
  void add_output(const std::string& name);
  void add_stage(const std::string& stage, const std::string& status);

  std::string config_hash() const;
  std::filesystem::path path_of(const std::string& name) const { return out_dir_ / name; }

  void write(double wall_seconds) const;

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<std::pair<std::string, std::uint64_t>> seeds_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, std::string>> stages_;
};

// FNV-1a of a file's bytes, hex. Throws IngestionError when unreadable.
std::string file_digest(const std::filesystem::path& path);

}  // namespace cdm::cli
