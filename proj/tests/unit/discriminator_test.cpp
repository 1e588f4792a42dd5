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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cdm/discriminator.hpp"
#include "cdm/error.hpp"
#include "cdm/features.hpp"
#include "cdm/momentum.hpp"
#include "test_models.hpp"

namespace cdm {
namespace {

using testing::letters;
using testing::random_markov_model;
using testing::seq;

// Mann-Whitney by explicit pair counting.
double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(Auc, MatchesPairCountingOracle) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto n = rng.uniform_int(2, 60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_int(0, 8));  // many ties
      y[i] = static_cast<int>(rng.uniform_int(0, 1));
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auc(s, y), auc_oracle(s, y), 1e-12);
    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) transformed[i] = std::exp(s[i]) + 3.0 * s[i];
    EXPECT_EQ(auc(transformed, y), auc(s, y));
  }
}

TEST(Auc, EdgeCases) {
  const std::vector<int> y = {1, 1, 0, 0};
  EXPECT_EQ(auc(std::vector<double>{3, 4, 1, 2}, y), 1.0);
  EXPECT_EQ(auc(std::vector<double>{5, 5, 5, 5}, y), 0.5);
  EXPECT_THROW(auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), ArgumentError);
}

TEST(Auc, IndependentLabelsNearHalf) {
  Rng rng(2);
  std::vector<double> s(10'000);
  std::vector<int> y(10'000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.normal();
    y[i] = static_cast<int>(rng.uniform_int(0, 1));
  }
  EXPECT_NEAR(auc(s, y), 0.5, 0.02);
}

class Features : public ::testing::Test {
 protected:
  Features()
      : vocab_(letters(4)),
        expert_(random_markov_model(vocab_, "e", 2, 1)),
        amateur_(random_markov_model(vocab_, "a", 1, 2)),
        pair_(expert_, amateur_) {}
  std::shared_ptr<Vocabulary> vocab_;
  LanguageModelHandle expert_, amateur_;
  ContrastPair pair_;
};

TEST_F(Features, LayoutIsFixedAndDeterministic) {
  FeatureConfig cfg;
  cfg.hash_bits = 10;
  const Featurizer f(pair_, cfg);
  EXPECT_EQ(f.dimension(), kDenseFeatures + 1024);
  const auto s = seq({7, 8, 9, 10, 7, 8});
  const auto x = f.featurize(s);
  const auto y = f.featurize(s);
  EXPECT_EQ(x.dense, y.dense);
  EXPECT_EQ(x.hashed, y.hashed);
  double total = 0.0;
  for (std::size_t i = 0; i < x.hashed.size(); ++i) {
    EXPECT_LT(x.hashed[i].first, 1024U);
    if (i > 0) {
      EXPECT_LT(x.hashed[i - 1].first, x.hashed[i].first);
    }
    total += x.hashed[i].second;
  }
  // 6 unigrams, 5 bigrams, 4 trigrams.
  EXPECT_EQ(total, 15.0);
  EXPECT_THROW(Featurizer(pair_, FeatureConfig{0, 1, 3}), ArgumentError);
}

TEST_F(Features, IdenticalModelsZeroTheMomentumBlock) {
  const ContrastPair twin(expert_, expert_, true);
  const auto x = Featurizer(twin, {}).featurize(seq({7, 9, 8, 10}));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(x.dense[i], 0.0) << i;
}

TEST_F(Features, HashDependsOnLayoutAndPair) {
  const Featurizer a(pair_, {});
  FeatureConfig other;
  other.max_ngram = 2;
  EXPECT_NE(a.config_hash(), Featurizer(pair_, other).config_hash());
  const ContrastPair swapped(amateur_, expert_);
  EXPECT_NE(a.config_hash(), Featurizer(swapped, {}).config_hash());
  EXPECT_EQ(a.config_hash(), Featurizer(pair_, {}).config_hash());
}

TEST(TraceSummary, SingletonStatistics) {
  MomentumTrace t;
  t.steps.push_back({0, 7, -1.0, -1.5, 0.5});
  const auto s = summarize(t);
  EXPECT_EQ(s.mean, 0.5);
  EXPECT_EQ(s.min, 0.5);
  EXPECT_EQ(s.max, 0.5);
  EXPECT_EQ(s.final, 0.5);
  EXPECT_EQ(s.stddev, 0.0);
  EXPECT_EQ(s.fraction_negative, 0.0);
  EXPECT_EQ(s.length, 1.0);
}

LabeledFeatures point(std::string id, std::array<double, kDenseFeatures> dense) {
  LabeledFeatures f;
  f.id = std::move(id);
  f.features.dense = dense;
  return f;
}

struct Toy {
  std::vector<LabeledFeatures> pos, neg;
};

Toy toy(std::size_t n, std::uint64_t seed, bool separable) {
  Rng rng(seed);
  Toy t;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    std::array<double, kDenseFeatures> d{};
    for (auto& x : d) x = rng.normal();
    const bool positive = separable ? (i % 2 == 0) : rng.uniform_int(0, 1) == 1;
    if (separable) d[0] = (positive ? 2.0 : -2.0) + 0.5 * rng.uniform();
    (positive ? t.pos : t.neg).push_back(point("x" + std::to_string(i), d));
  }
  return t;
}

double accuracy(const LinearDiscriminator& d, const Toy& t) {
  double correct = 0.0;
  for (const auto& p : t.pos) correct += d.score(p.features) > 0.5;
  for (const auto& n : t.neg) correct += d.score(n.features) < 0.5;
  return correct / static_cast<double>(t.pos.size() + t.neg.size());
}

TEST(Discriminator, SeparableDataIsLearnedExactly) {
  const Toy train = toy(200, 1, true);
  DiscriminatorConfig cfg;
  cfg.hashed_dim = 16;
  DiscriminatorReport report;
  const auto d = train_discriminator(train.pos, train.neg, 42, cfg, &report);
  EXPECT_EQ(report.validation_accuracy, 1.0);
  EXPECT_EQ(accuracy(d, toy(200, 2, true)), 1.0);
}

TEST(Discriminator, LossIsMonotone) {
  const Toy train = toy(300, 3, false);
  DiscriminatorConfig cfg;
  cfg.hashed_dim = 16;
  DiscriminatorReport report;
  train_discriminator(train.pos, train.neg, 1, cfg, &report);
  ASSERT_EQ(report.loss_history.size(), static_cast<std::size_t>(cfg.epochs));
  for (std::size_t i = 1; i < report.loss_history.size(); ++i) {
    EXPECT_LE(report.loss_history[i], report.loss_history[i - 1] + 1e-12);
  }
}

TEST(Discriminator, ShuffledLabelsStayAtChance) {
  const Toy data = toy(1000, 4, false);
  DiscriminatorConfig cfg;
  cfg.hashed_dim = 16;
  cfg.validation_fraction = 0.5;
  DiscriminatorReport report;
  train_discriminator(data.pos, data.neg, 1, cfg, &report);
  EXPECT_NEAR(report.validation_accuracy, 0.5, 0.05);
  EXPECT_NEAR(report.validation_auc, 0.5, 0.05);
}

TEST(Discriminator, DeterministicWeights) {
  const Toy data = toy(100, 5, false);
  DiscriminatorConfig cfg;
  cfg.hashed_dim = 16;
  const auto a = train_discriminator(data.pos, data.neg, 1, cfg);
  const auto b = train_discriminator(data.pos, data.neg, 1, cfg);
  EXPECT_EQ(serialize_discriminator(a), serialize_discriminator(b));
}

TEST(Discriminator, OneClassIsATrainingError) {
  const Toy data = toy(10, 6, true);
  DiscriminatorConfig cfg;
  cfg.hashed_dim = 16;
  EXPECT_THROW(train_discriminator(data.pos, {}, 1, cfg), TrainingError);
}

TEST(Discriminator, ZeroModelScoresHalf) {
  LinearDiscriminator d;
  d.weights.assign(kDenseFeatures + 8, 0.0);
  d.dense_scale.fill(1.0);
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    FeatureVector x;
    for (auto& v : x.dense) v = 10.0 * rng.normal();
    x.hashed = {{3, 0.6}, {5, 0.8}};
    EXPECT_EQ(d.score(x), 0.5);
  }
}

TEST(Discriminator, ScoresAreProbabilitiesAndNegationFlips) {
  const Toy data = toy(100, 8, true);
  DiscriminatorConfig cfg;
  cfg.hashed_dim = 16;
  const auto d = train_discriminator(data.pos, data.neg, 1, cfg);
  const auto n = d.negated();
  for (const auto& p : data.pos) {
    const double s = d.score(p.features);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    EXPECT_NEAR(n.score(p.features), 1.0 - s, 1e-12);
  }
  EXPECT_EQ(logistic(0.0), 0.5);
  EXPECT_GT(logistic(-800.0), -1.0);
  EXPECT_EQ(logistic(-30.0) + logistic(30.0), 1.0);
}

TEST(Discriminator, MismatchedFeaturizerIsRejected) {
  auto v = letters(3);
  const ContrastPair pair(random_markov_model(v, "e", 2, 1), random_markov_model(v, "a", 1, 2));
  FeatureConfig small;
  small.hash_bits = 6;
  const Featurizer f(pair, small);
  std::vector<LabeledFeatures> pos, neg;
  Rng rng(3);
  for (int i = 0; i < 40; ++i) {
    TokenSequence s;
    for (int k = 0; k < 6; ++k) s.ids.push_back(static_cast<TokenId>(rng.uniform_int(7, 9)));
    (i % 2 ? pos : neg).push_back({"s" + std::to_string(i), f.featurize(s)});
  }
  DiscriminatorConfig cfg;
  cfg.hashed_dim = small.hashed_dim();
  const auto d = train_discriminator(pos, neg, f.config_hash(), cfg);
  EXPECT_NO_THROW(d.score(f, seq({7, 8})));
  FeatureConfig other = small;
  other.hash_seed = 99;
  EXPECT_THROW(d.score(Featurizer(pair, other), seq({7, 8})), CompatibilityError);
}

TEST(Discriminator, FileRoundTripAndCorruption) {
  const Toy data = toy(60, 9, false);
  DiscriminatorConfig cfg;
  cfg.hashed_dim = 16;
  const auto d = train_discriminator(data.pos, data.neg, 5, cfg);
  const auto path = std::filesystem::temp_directory_path() / ("cdm_disc_" + std::to_string(::getpid()) + ".json");
  save_discriminator(d, path);
  const auto back = load_discriminator(path);
  std::filesystem::remove(path);
  EXPECT_EQ(serialize_discriminator(back), serialize_discriminator(d));
  EXPECT_EQ(back.weights, d.weights);
  EXPECT_EQ(back.bias, d.bias);
  EXPECT_EQ(back.feature_hash, 5U);

  const std::string text = serialize_discriminator(d);
  EXPECT_THROW(deserialize_discriminator(text.substr(0, text.size() / 2)), ChecksumError);
  std::string tampered = text;
  const auto at = tampered.find("\"bias\":");
  ASSERT_NE(at, std::string::npos);
  tampered.insert(at + 7, "1");
  EXPECT_THROW(deserialize_discriminator(tampered), ChecksumError);
  std::string magic = text;
  magic.replace(magic.find("cdm-discriminator"), 3, "xyz");
  EXPECT_THROW(deserialize_discriminator(magic), FormatError);
}

}  // namespace
}  // namespace cdm
