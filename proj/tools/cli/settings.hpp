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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cdm::cli {

// Every flag of every subcommand. Flags left unset keep these defaults.
struct Settings {
  std::string log_level = "info";
  std::size_t jobs = 0;  // 0 -> available cores
  std::string out_dir;

  // Shared model selection.
  std::string expert;
  std::string amateur;
  std::string vocab_from;

  struct {
    std::uint64_t seed = 7;
    std::size_t train_tokens = 50'000;
    std::size_t heldout_tokens = 10'000;
  } gen_corpus;

  struct {
    std::string corpus;
    int order = 3;
    int fim_copies = 0;
    std::vector<double> weights;
    double additive = 0.01;
    std::string identity;
    bool lowercase = false;
    std::uint64_t seed = 0;
  } train_lm;

  struct {
    std::vector<std::string> models;
    std::string corpus;
    std::vector<int> orders = {1, 2, 4};
    std::string heldout;
    std::uint64_t seed = 7;
  } audit;

  struct {
    std::string positives;
    std::string strategy = "segment-single";
    double gamma = 1.0;
    std::optional<double> top_p;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    std::string mode = "fim";
    bool baseline = false;
    std::string audit_heldout;
    int max_attempts = 8;
  } synth;

  struct {
    std::string positives;
    std::string negatives;
    double l2 = 1e-4;
    int epochs = 300;
    std::uint64_t seed = 1;
    double validation_fraction = 0.10;
    int hash_bits = 16;
    int max_ngram = 3;
  } train_disc;

  struct {
    std::string dataset;
    std::string aspect;
    double l2 = 1e-9;
    std::uint64_t seed = 0;
    std::string target_source = "human";
  } train_pooler;

  struct {
    std::string dataset;
    std::string pooling = "avg";
    std::string pooler;
    std::string discriminator;
    bool traces = false;
    bool resume = false;
    int hash_bits = 16;
    int max_ngram = 3;
  } score;

  struct {
    std::string dataset;
    std::vector<std::string> scores;
  } evaluate;

  struct {
    std::uint64_t seed = 7;
    std::vector<int> criteria;
  } desk;

  struct {
    std::string model;
    std::string name = "mock";
    int port = 8080;
  } serve;
};

}  // namespace cdm::cli
