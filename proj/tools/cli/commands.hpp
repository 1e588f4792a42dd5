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

#include "manifest.hpp"
#include "settings.hpp"

namespace cdm::cli {

// Each returns an exit code and records its stages in the manifest.
int gen_corpus(const Settings& s, Manifest& m);
int train_lm(const Settings& s, Manifest& m);
int audit_order(const Settings& s, Manifest& m);
int synth_negatives(const Settings& s, Manifest& m);
int train_discriminator_cmd(const Settings& s, Manifest& m);
int train_pooler_cmd(const Settings& s, Manifest& m);
int score(const Settings& s, Manifest& m);
int evaluate(const Settings& s, Manifest& m);
int repro_desk(const Settings& s, Manifest& m);
int serve_mock(const Settings& s);

}  // namespace cdm::cli
