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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cdm/features.hpp"

namespace cdm {

struct DiscriminatorConfig {
  double l2 = 1e-4;
  int epochs = 300;
  std::uint64_t seed = 1;
  double validation_fraction = 0.10;
  // Must equal the featurizer's hashed dimension.
  std::size_t hashed_dim = std::size_t{1} << 16;
};

struct LabeledFeatures {
  std::string id;
  FeatureVector features;
};

struct DiscriminatorReport {
  std::vector<double> loss_history;  // regularized training loss per epoch
  double final_loss = 0.0;
  double validation_accuracy = 0.0;
  double validation_auc = 0.0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

// Logistic regression over featurized sequences. Inputs are standardized
// (dense block by training mean/std, hashed block L2-normalized) before the
// linear map, and the standardization is part of the model.
class LinearDiscriminator {
 public:
  double logit(const FeatureVector& x) const;
  // logistic(w . x + b), in (0, 1); higher means more positive-like.
  double score(const FeatureVector& x) const;

  // Throws CompatibilityError when `featurizer` does not match the layout
  // and pair this model was trained with.
  double score(const Featurizer& featurizer, const TokenSequence& s) const;

  LinearDiscriminator negated() const;

  std::vector<double> weights;  // kDenseFeatures + hashed_dim entries
  double bias = 0.0;
  double l2 = 0.0;
  std::array<double, kDenseFeatures> dense_mean{};
  std::array<double, kDenseFeatures> dense_scale{};
  std::uint64_t feature_hash = 0;
  int epochs = 0;
  std::uint64_t seed = 0;
};

// Symmetric logistic: logistic(z) + logistic(-z) == 1 exactly.
double logistic(double z);

// Full-batch gradient descent on the class-weighted, L2-regularized log
// loss with step 1/L for the loss's smoothness bound L, which makes the
// per-epoch loss non-increasing. A seeded 10% split is held out for the
// report. Throws TrainingError when a class is empty and ArgumentError when
// ids are shared between the classes.
LinearDiscriminator train_discriminator(std::span<const LabeledFeatures> positives,
                                        std::span<const LabeledFeatures> negatives,
                                        std::uint64_t feature_hash,
                                        const DiscriminatorConfig& config,
                                        DiscriminatorReport* report = nullptr);

std::string serialize_discriminator(const LinearDiscriminator& d);
LinearDiscriminator deserialize_discriminator(const std::string& data);
void save_discriminator(const LinearDiscriminator& d, const std::filesystem::path& path);
LinearDiscriminator load_discriminator(const std::filesystem::path& path);

// Mann-Whitney AUC with midranks for ties. labels: nonzero = positive.
// Throws ArgumentError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace cdm
