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
#include <iosfwd>
#include <string>

#include "cdm/ngram_model.hpp"

namespace cdm {

inline constexpr int kModelFormatVersion = 1;

// Canonical text container:
//
//   cdm-ngram
//   format-version 1
//   order <n>
//   vocab-size <V>
//   checksum <fnv1a-64 of body, hex>
//   body-bytes <length>
//   ---
//   <body>
//
// The body lists the smoothing parameters as hex floats, the vocabulary,
// and count tables with contexts in sorted order, so equal models produce
// byte-identical files.
std::string serialize_model(const NgramModel& model);
NgramModel deserialize_model(const std::string& data);

void save_model(const NgramModel& model, const std::filesystem::path& path);
// FormatError on a bad magic line or version; ChecksumError on truncation
// or corruption.
NgramModel load_model(const std::filesystem::path& path);

}  // namespace cdm
