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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "cdm/corpus.hpp"
#include "cdm/degradation.hpp"
#include "cdm/error.hpp"
#include "cdm/ngram_model.hpp"
#include "cdm/pooling.hpp"
#include "cdm/scoring.hpp"
#include "cdm/stats.hpp"
#include "cdm/synthetic.hpp"
#include "test_models.hpp"

namespace cdm {
namespace {

using testing::letters;
using testing::random_markov_model;

MomentumTrace trace_of(const std::vector<double>& values) {
  MomentumTrace t;
  for (std::size_t i = 0; i < values.size(); ++i) t.steps.push_back({i, 7, 0.0, -values[i], values[i]});
  return t;
}

TEST(Pooling, WorkedExample) {
  const auto t = trace_of({0.1, 0.5, -0.2});
  EXPECT_NEAR(pool(t, PoolingStrategy::kSum).score, 0.4, 1e-15);
  EXPECT_NEAR(pool(t, PoolingStrategy::kAvg).score, 0.4 / 3.0, 1e-15);
  EXPECT_EQ(pool(t, PoolingStrategy::kMin).score, -0.2);
  EXPECT_EQ(pool(t, PoolingStrategy::kMax).score, 0.5);
  EXPECT_EQ(pool(t, PoolingStrategy::kAvg).length, 3U);
}

TEST(Pooling, ConstantTrace) {
  for (double c : {-1.25, 0.0, 0.3, 7.0}) {
    for (std::size_t n : {1U, 4U, 9U}) {
      const auto t = trace_of(std::vector<double>(n, c));
      EXPECT_EQ(pool(t, PoolingStrategy::kAvg).score, c);
      EXPECT_EQ(pool(t, PoolingStrategy::kMin).score, c);
      EXPECT_EQ(pool(t, PoolingStrategy::kMax).score, c);
      EXPECT_EQ(pool(t, PoolingStrategy::kSum).score, c * static_cast<double>(n));
    }
  }
}

TEST(Pooling, OrderingAndSumIdentityOnRandomTraces) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> v(rng.uniform_int(1, 80));
    for (auto& x : v) x = rng.normal() * std::exp(3.0 * rng.normal());
    const auto t = trace_of(v);
    const double avg = pool(t, PoolingStrategy::kAvg).score;
    EXPECT_LE(pool(t, PoolingStrategy::kMin).score, avg);
    EXPECT_LE(avg, pool(t, PoolingStrategy::kMax).score);
    EXPECT_EQ(pool(t, PoolingStrategy::kSum).score, avg * static_cast<double>(v.size()));
  }
}

TEST(Pooling, SumAndAvgRankAlikeOnlyAtFixedLength) {
  Rng rng(2);
  std::vector<MomentumTrace> same_len;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(12);
    for (auto& x : v) x = rng.normal();
    same_len.push_back(trace_of(v));
  }
  for (std::size_t i = 0; i < same_len.size(); ++i) {
    for (std::size_t j = 0; j < same_len.size(); ++j) {
      const bool by_sum = pool(same_len[i], PoolingStrategy::kSum).score < pool(same_len[j], PoolingStrategy::kSum).score;
      const bool by_avg = pool(same_len[i], PoolingStrategy::kAvg).score < pool(same_len[j], PoolingStrategy::kAvg).score;
      EXPECT_EQ(by_sum, by_avg);
    }
  }
  // Lengths differ: a long mildly positive trace outranks a short strongly
  // positive one under sum but not under avg.
  const auto long_mild = trace_of(std::vector<double>(40, 0.1));
  const auto short_strong = trace_of({1.0, 1.0});
  EXPECT_GT(pool(long_mild, PoolingStrategy::kSum).score, pool(short_strong, PoolingStrategy::kSum).score);
  EXPECT_LT(pool(long_mild, PoolingStrategy::kAvg).score, pool(short_strong, PoolingStrategy::kAvg).score);
}

TEST(Pooling, Errors) {
  EXPECT_THROW(pool(MomentumTrace{}, PoolingStrategy::kAvg), ArgumentError);
  EXPECT_THROW(parse_pooling("median"), ArgumentError);
  EXPECT_THROW(pool(trace_of({1.0}), PoolingStrategy::kClassifier), ArgumentError);
  for (auto s : {PoolingStrategy::kSum, PoolingStrategy::kAvg, PoolingStrategy::kMin, PoolingStrategy::kMax,
                 PoolingStrategy::kClassifier}) {
    EXPECT_EQ(parse_pooling(pooling_name(s)), s);
  }
}

TEST(Pooling, IdenticalModelsPoolToZero) {
  auto m = random_markov_model(letters(3), "m", 2, 3);
  const ContrastPair twin(m, m, true);
  const auto t = momentum_trace(twin, testing::seq({7, 8, 9, 8}));
  for (auto s : {PoolingStrategy::kSum, PoolingStrategy::kAvg, PoolingStrategy::kMin, PoolingStrategy::kMax}) {
    EXPECT_EQ(pool(t, s).score, 0.0);
  }
}

std::vector<MomentumTrace> random_traces(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MomentumTrace> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(rng.uniform_int(3, 30));
    const double shift = rng.normal();
    for (auto& x : v) x = shift + rng.normal();
    out.push_back(trace_of(v));
  }
  return out;
}

TEST(Pooler, RealizableTargetsAreReproduced) {
  const auto traces = random_traces(300, 4);
  for (auto s : {PoolingStrategy::kAvg, PoolingStrategy::kMin}) {
    std::vector<double> y;
    for (const auto& t : traces) y.push_back(pool(t, s).score);
    PoolerReport report;
    const auto p = train_pooler(traces, y, PoolerConfig{}, &report);
    double sse = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) sse += std::pow(p.pool(traces[i]).score - y[i], 2);
    EXPECT_LT(std::sqrt(sse / static_cast<double>(traces.size())), 1e-6);
    EXPECT_LT(report.train_rmse, 1e-6);
  }
}

TEST(Pooler, IndependentTargetsExplainNothingOutOfSample) {
  const auto train = random_traces(1000, 5);
  const auto test = random_traces(1000, 6);
  Rng rng(7);
  std::vector<double> y_train(train.size()), y_test(test.size());
  for (auto& y : y_train) y = rng.uniform();
  for (auto& y : y_test) y = rng.uniform();
  const auto p = train_pooler(train, y_train, PoolerConfig{});
  double mean = 0.0;
  for (double y : y_test) mean += y / static_cast<double>(y_test.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    sse += std::pow(p.pool(test[i]).score - y_test[i], 2);
    sst += std::pow(y_test[i] - mean, 2);
  }
  EXPECT_NEAR(1.0 - sse / sst, 0.0, 0.1);
}

TEST(Pooler, DegenerateInputWarnsInsteadOfCrashing) {
  const std::vector<MomentumTrace> same(20, trace_of({0.5, -0.5, 0.25}));
  std::vector<double> y(20);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
  PoolerReport report;
  PoolerModel p;
  ASSERT_NO_THROW(p = train_pooler(same, y, PoolerConfig{}, &report));
  EXPECT_FALSE(report.warnings.empty());
  EXPECT_TRUE(std::isfinite(p.pool(same[0]).score));
  EXPECT_THROW(train_pooler(std::span(same).first(5), std::span(y).first(5), PoolerConfig{}), ArgumentError);
}

TEST(Pooler, RoundTripIsExact) {
  const auto traces = random_traces(50, 8);
  std::vector<double> y;
  for (const auto& t : traces) y.push_back(pool(t, PoolingStrategy::kMax).score + 0.1);
  PoolerConfig cfg;
  cfg.target_source = "synthesized";
  const auto p = train_pooler(traces, y, cfg);
  const auto back = deserialize_pooler(serialize_pooler(p));
  EXPECT_EQ(serialize_pooler(back), serialize_pooler(p));
  EXPECT_EQ(back.target_source, "synthesized");
  for (const auto& t : traces) EXPECT_EQ(back.pool(t).score, p.pool(t).score);
  std::string bad = serialize_pooler(p);
  bad.replace(bad.find("cdm-pooler"), 3, "xyz");
  EXPECT_THROW(deserialize_pooler(bad), FormatError);
}

class Scoring : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new SyntheticCorpus(make_bundled_corpus(7, 50'000, 30'000));
    TrainOptions o;
    o.order = 4;
    expert_ = new LanguageModelHandle(std::make_shared<NgramModel>(train_ngram(corpus_->train, corpus_->vocab, o)));
    o.order = 1;
    amateur_ = new LanguageModelHandle(std::make_shared<NgramModel>(train_ngram(corpus_->train, corpus_->vocab, o)));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete expert_;
    delete amateur_;
  }
  static ContrastPair pair() { return ContrastPair(*expert_, *amateur_); }
  static std::vector<Document> documents(std::size_t n) {
    std::vector<Document> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({"d" + std::to_string(i), decode(*corpus_->vocab, corpus_->heldout[i].ids), {}});
    return out;
  }
  static SyntheticCorpus* corpus_;
  static LanguageModelHandle* expert_;
  static LanguageModelHandle* amateur_;
};
SyntheticCorpus* Scoring::corpus_ = nullptr;
LanguageModelHandle* Scoring::expert_ = nullptr;
LanguageModelHandle* Scoring::amateur_ = nullptr;

TEST_F(Scoring, EmptyDatasetIsEmptyOutput) {
  const auto r = score_dataset(pair(), std::vector<Document>{}, ScoringOptions{});
  EXPECT_TRUE(r.scores.empty());
  EXPECT_TRUE(r.skipped_ids.empty());
}

TEST_F(Scoring, RepeatRunsAndJobCountsAgree) {
  const auto docs = documents(60);
  ScoringOptions one;
  ScoringOptions four;
  four.jobs = 4;
  const auto a = score_dataset(pair(), docs, one);
  const auto b = score_dataset(pair(), docs, one);
  const auto c = score_dataset(pair(), docs, four);
  ASSERT_EQ(a.scores.size(), docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EXPECT_EQ(a.scores[i].id, docs[i].id);
    EXPECT_EQ(pooled_score_json(a.scores[i]), pooled_score_json(b.scores[i]));
    EXPECT_EQ(pooled_score_json(a.scores[i]), pooled_score_json(c.scores[i]));
  }
}

TEST_F(Scoring, CleanOutscoresDegraded) {
  const ContrastPair p = pair();
  constexpr std::size_t kPerClass = 500;
  std::vector<double> clean, degraded;
  for (std::size_t i = 0; i < kPerClass; ++i) clean.push_back(pool(momentum_trace(p, corpus_->heldout[i]), PoolingStrategy::kAvg).score);
  DegradationConfig cfg;
  cfg.gamma = 1.0;
  cfg.max_length = 32;
  for (std::size_t i = 0; degraded.size() < kPerClass; ++i) {
    Rng rng = Rng::for_task(3, i);
    const auto s = sample_degraded(p, {}, cfg, rng);
    if (s.tokens.empty()) continue;
    degraded.push_back(pool(momentum_trace(p, TokenSequence{s.tokens, {}}), PoolingStrategy::kAvg).score);
  }
  EXPECT_LT(welch_greater_pvalue(clean, degraded), 0.01);
}

TEST_F(Scoring, DuplicateIdsAndMissingPoolerAreRejected) {
  auto docs = documents(3);
  docs[2].id = docs[0].id;
  EXPECT_THROW(score_dataset(pair(), docs, ScoringOptions{}), IngestionError);
  ScoringOptions cls;
  cls.strategy = PoolingStrategy::kClassifier;
  EXPECT_THROW(score_dataset(pair(), documents(3), cls), ArgumentError);
}

TEST_F(Scoring, HighOovRateWarns) {
  std::vector<Document> docs = {{"x", "w01 zz1 zz2 w02", {}}};
  const auto r = score_dataset(pair(), docs, ScoringOptions{});
  EXPECT_NEAR(r.oov_rate, 0.5, 1e-12);
  EXPECT_FALSE(r.warnings.empty());
  ASSERT_EQ(r.scores.size(), 1U);
}

TEST_F(Scoring, CheckpointResumesAndDropsTornLines) {
  const auto docs = documents(30);
  const auto path = std::filesystem::temp_directory_path() / ("cdm_ckpt_" + std::to_string(::getpid()) + ".jsonl");
  std::filesystem::remove(path);
  ScoringOptions opts;
  const auto full = score_dataset(pair(), docs, opts);
  {
    std::ofstream out(path);
    for (std::size_t i = 0; i < 10; ++i) out << pooled_score_json(full.scores[i]) << '\n';
    out << "{\"id\": \"d10\", \"strat";  // interrupted write
  }
  opts.checkpoint = path;
  const auto resumed = score_dataset(pair(), docs, opts);
  EXPECT_EQ(resumed.resumed, 10U);
  ASSERT_EQ(resumed.scores.size(), docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_EQ(resumed.scores[i].score, full.scores[i].score);
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line, pooled_score_json(full.scores[lines]));
    ++lines;
  }
  EXPECT_EQ(lines, docs.size());
  std::filesystem::remove(path);
}

// Expert that fails with a transport error whenever the context starts with
// one of the poisoned tokens, standing in for a flaky remote backend.
class Flaky final : public LanguageModel {
 public:
  Flaky(LanguageModelHandle inner, std::set<TokenId> poison) : inner_(std::move(inner)), poison_(std::move(poison)) {}
  std::vector<double> next_logprobs(std::span<const TokenId> ctx) const override {
    if (!ctx.empty() && poison_.count(ctx[0]) != 0U) throw TransportError("connection reset", 3);
    return inner_->next_logprobs(ctx);
  }
  const Vocabulary& vocabulary() const override { return inner_->vocabulary(); }
  std::string identity() const override { return "flaky"; }
  BackendKind kind() const override { return BackendKind::kRemote; }

 private:
  LanguageModelHandle inner_;
  std::set<TokenId> poison_;
};

TEST_F(Scoring, TransportFailuresSkipThenAbort) {
  const auto docs = documents(200);
  std::map<TokenId, std::size_t> first;
  for (std::size_t i = 0; i < docs.size(); ++i) ++first[corpus_->heldout[i].ids[0]];
  // Grow a poisoned set up to 5% of records, then past 10%.
  std::set<TokenId> few, many;
  std::size_t few_hits = 0, many_hits = 0;
  for (const auto& [tok, n] : first) {
    if (few_hits + n <= docs.size() / 20) {
      few.insert(tok);
      few_hits += n;
    }
    if (many_hits <= docs.size() / 10) {
      many.insert(tok);
      many_hits += n;
    }
  }
  ASSERT_GT(few_hits, 0U);
  ASSERT_GT(many_hits * 10, docs.size());
  const auto r = score_dataset(ContrastPair(std::make_shared<Flaky>(*expert_, few), *amateur_), docs, ScoringOptions{});
  EXPECT_EQ(r.skipped_ids.size(), few_hits);
  EXPECT_EQ(r.scores.size(), docs.size() - few_hits);
  EXPECT_THROW(score_dataset(ContrastPair(std::make_shared<Flaky>(*expert_, many), *amateur_), docs, ScoringOptions{}),
               RunError);
}

}  // namespace
}  // namespace cdm
