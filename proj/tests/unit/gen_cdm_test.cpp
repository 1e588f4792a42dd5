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
#include <map>

#include "cdm/error.hpp"
#include "cdm/fim.hpp"
#include "cdm/masking.hpp"
#include "cdm/negatives.hpp"
#include "cdm/ngram_model.hpp"
#include "cdm/stats.hpp"
#include "cdm/synthetic.hpp"
#include "test_models.hpp"

namespace cdm {
namespace {

TokenSequence flat(std::size_t n) {
  TokenSequence s;
  for (std::size_t i = 0; i < n; ++i) s.ids.push_back(static_cast<TokenId>(7 + i % 5));
  return s;
}

TokenSequence dialogue(const Vocabulary& v) {
  const std::vector<std::string> turns = {"a b", "c d e", "a c"};
  return encode_turns(v, turns, OovPolicy::kReject);
}

void expect_valid(const MaskSpec& m, const TokenSequence& s) {
  ASSERT_FALSE(m.spans.empty());
  EXPECT_NO_THROW(m.validate(s.size()));
  for (std::size_t i = 0; i < m.spans.size(); ++i) {
    EXPECT_GE(m.spans[i].span.length, 1U);
    EXPECT_LE(m.spans[i].span.end(), s.size());
    if (m.spans[i].kind == SpanKind::kSegment) {
      EXPECT_LE(m.spans[i].span.length, kMaxSegmentLength);
    }
    if (i > 0) {
      EXPECT_LE(m.spans[i - 1].span.end(), m.spans[i].span.start);
    }
  }
}

TEST(Masking, SegmentSingleOnFiveTokensClipsLength) {
  Rng rng(1);
  const auto s = flat(5);
  std::set<std::size_t> lengths;
  for (int i = 0; i < 2000; ++i) {
    const auto m = select_mask(s, "segment-single", rng);
    ASSERT_EQ(m.spans.size(), 1U);
    expect_valid(m, s);
    lengths.insert(m.spans[0].span.length);
  }
  EXPECT_EQ(*lengths.begin(), 1U);
  EXPECT_EQ(*lengths.rbegin(), 5U);
}

TEST(Masking, UtteranceSingleAlignsToATurn) {
  auto v = testing::letters(5);
  const auto s = dialogue(*v);
  ASSERT_EQ(s.turn_starts.size(), 3U);
  Rng rng(2);
  std::set<std::size_t> starts;
  for (int i = 0; i < 300; ++i) {
    const auto m = select_mask(s, "utterance-single", rng);
    ASSERT_EQ(m.spans.size(), 1U);
    bool aligned = false;
    for (std::size_t t = 0; t < s.turn_starts.size(); ++t) aligned = aligned || m.spans[0].span == s.turn_span(t);
    EXPECT_TRUE(aligned);
    starts.insert(m.spans[0].span.start);
  }
  EXPECT_EQ(starts.size(), 3U);
}

TEST(Masking, EveryStrategyOnFlatAndDialogueInputs) {
  auto v = testing::letters(5);
  const auto turns = dialogue(*v);
  const auto plain = flat(30);
  Rng rng(3);
  for (const auto& name : StrategyRegistry::with_builtins().names()) {
    for (int i = 0; i < 200; ++i) {
      expect_valid(select_mask(turns, name, rng), turns);
      if (name == "utterance-single") {
        EXPECT_THROW(select_mask(plain, name, rng), StrategyError);
      } else {
        expect_valid(select_mask(plain, name, rng), plain);
      }
    }
  }
}

TEST(Masking, ErrorsForShortInputAndUnknownNames) {
  Rng rng(4);
  EXPECT_THROW(select_mask(flat(1), "segment-single", rng), ArgumentError);
  EXPECT_THROW(select_mask(flat(10), "amr-multi", rng), StrategyError);
}

TEST(Masking, MixedMultiEditCountsAreUniform) {
  Rng rng(5);
  const auto s = flat(120);
  std::array<double, kMaxEdits> counts{};
  constexpr int kDraws = 10'000;
  for (int i = 0; i < kDraws; ++i) {
    const auto m = select_mask(s, "mixed-multi", rng);
    ASSERT_GE(m.requested_edits, 1U);
    ASSERT_LE(m.requested_edits, kMaxEdits);
    ++counts[m.requested_edits - 1];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / kMaxEdits;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_GT(chi_squared_sf(chi2, kMaxEdits - 1), 0.01);
}

TEST(Masking, PluginSelectorsAreAccepted) {
  auto registry = StrategyRegistry::with_builtins();
  registry.add("first-two", [](const TokenSequence&, Rng&) {
    MaskSpec m;
    m.spans.push_back({Span{0, 2}, SpanKind::kExternal});
    return m;
  });
  Rng rng(6);
  EXPECT_TRUE(registry.contains("first-two"));
  EXPECT_EQ(registry.select("first-two", flat(6), rng).spans[0].span, (Span{0, 2}));
}

// Bundled chain with fill-in-the-middle infillers of orders 1, 3 and 4.
class Synthesis : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new SyntheticCorpus(make_bundled_corpus(7, 50'000, 30'000));
    Rng rng(17);
    const auto fim = make_fim_training_corpus(corpus_->train, 1, rng);
    models_ = new std::map<int, LanguageModelHandle>;
    for (int k : {1, 3, 4}) {
      TrainOptions o;
      o.order = k;
      (*models_)[k] = std::make_shared<NgramModel>(train_ngram(fim, corpus_->vocab, o));
    }
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete models_;
  }
  static ContrastPair pair(int amateur = 1) { return ContrastPair(models_->at(4), models_->at(amateur)); }
  static std::vector<PositiveExample> positives(std::size_t n) {
    EXPECT_LE(n, corpus_->heldout.size());
    n = std::min(n, corpus_->heldout.size());
    std::vector<PositiveExample> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({"p" + std::to_string(i), corpus_->heldout[i]});
    return out;
  }
  static SynthesisOptions options(std::string strategy = "segment-single", double gamma = 1.0) {
    SynthesisOptions o;
    o.strategy = std::move(strategy);
    o.degradation.gamma = gamma;
    o.degradation.seed = 11;
    o.audit_passed = true;
    return o;
  }
  static SyntheticCorpus* corpus_;
  static std::map<int, LanguageModelHandle>* models_;
};
SyntheticCorpus* Synthesis::corpus_ = nullptr;
std::map<int, LanguageModelHandle>* Synthesis::models_ = nullptr;

TEST_F(Synthesis, SegmentSingleEditsExactlyOneSpan) {
  const auto pos = positives(100);
  const auto result = synthesize_negatives(pair(), pos, options());
  ASSERT_EQ(result.records.size(), 100U);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto& r = result.records[i];
    EXPECT_EQ(r.source_id, pos[i].id);
    ASSERT_EQ(r.edits.size(), 1U);
    const auto& e = r.edits[0];
    EXPECT_LE(e.original.length, kMaxSegmentLength);
    EXPECT_LE(e.regenerated, 2 * e.original.length);
    const auto& src = pos[i].seq.ids;
    const auto& out = r.manipulated.ids;
    ASSERT_EQ(out.size(), src.size() - e.original.length + e.regenerated);
    EXPECT_TRUE(std::equal(src.begin(), src.begin() + e.original.start, out.begin()));
    EXPECT_TRUE(std::equal(src.begin() + e.original.end(), src.end(), out.end() - (src.size() - e.original.end())));
    EXPECT_NE(out, src);
  }
}

TEST_F(Synthesis, MultiEditPreservesContextOutsideSpans) {
  const auto pos = positives(150);
  const auto result = synthesize_negatives(pair(), pos, options("mixed-multi"));
  for (const auto& r : result.records) {
    const auto& src = std::find_if(pos.begin(), pos.end(), [&](const auto& p) { return p.id == r.source_id; })->seq.ids;
    std::size_t at_src = 0, at_out = 0;
    for (const auto& e : r.edits) {
      while (at_src < e.original.start) EXPECT_EQ(r.manipulated.ids.at(at_out++), src[at_src++]);
      at_src = e.original.end();
      at_out += e.regenerated;
    }
    while (at_src < src.size()) EXPECT_EQ(r.manipulated.ids.at(at_out++), src[at_src++]);
    EXPECT_EQ(at_out, r.manipulated.ids.size());
  }
}

TEST_F(Synthesis, GammaZeroEqualsAmateurResampling) {
  const auto pos = positives(60);
  const auto cdm = synthesize_negatives(pair(), pos, options("mixed-multi", 0.0));
  const auto base = resample_baseline(models_->at(1), pos, options("mixed-multi", 1.0));
  ASSERT_EQ(cdm.records.size(), base.records.size());
  for (std::size_t i = 0; i < cdm.records.size(); ++i) {
    EXPECT_EQ(cdm.records[i].manipulated.ids, base.records[i].manipulated.ids);
    EXPECT_EQ(base.records[i].strategy, "resample-baseline");
    EXPECT_EQ(base.records[i].gamma, 0.0);
  }
}

TEST_F(Synthesis, GammaZeroSegmentMatchesAmateurInfill) {
  const ContrastPair p = pair();
  const ContrastPair amateur_only(models_->at(1), models_->at(1), true);
  DegradationConfig cfg;
  cfg.gamma = 0.0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng r1(seed), r2(seed);
    const auto& s = corpus_->heldout[seed];
    const Span span{2, 3};
    EXPECT_EQ(regenerate_segment(p, s, span, cfg, r1).tokens, regenerate_segment(amateur_only, s, span, cfg, r2).tokens);
  }
  Rng rng(0);
  EXPECT_THROW(regenerate_segment(p, corpus_->heldout[0], Span{1, 0}, cfg, rng), ArgumentError);
}

TEST_F(Synthesis, PlainModelsRefuseFillInTheMiddle) {
  TrainOptions o;
  o.order = 2;
  auto e = std::make_shared<NgramModel>(train_ngram(corpus_->train, corpus_->vocab, o));
  o.order = 1;
  auto a = std::make_shared<NgramModel>(train_ngram(corpus_->train, corpus_->vocab, o));
  const ContrastPair plain(e, a);
  EXPECT_THROW(synthesize_negatives(plain, positives(3), options()), CapabilityError);
  auto blind = options();
  blind.mode = RegenerationMode::kSuffixBlind;
  EXPECT_EQ(synthesize_negatives(plain, positives(3), blind).records.size(), 3U);
}

TEST_F(Synthesis, ReplayReproducesEveryRecord) {
  const auto pos = positives(40);
  const auto opts = options("mixed-multi");
  const auto result = synthesize_negatives(pair(), pos, opts);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto again = replay_negative(pair(), pos[i], opts);
    EXPECT_EQ(negative_record_json(again), negative_record_json(result.records[i]));
    const auto parsed = parse_negative_record(negative_record_json(result.records[i]));
    EXPECT_EQ(negative_record_json(parsed), negative_record_json(result.records[i]));
  }
}

TEST_F(Synthesis, OutputIndependentOfJobs) {
  const auto pos = positives(80);
  auto opts = options("mixed-multi");
  const auto one = synthesize_negatives(pair(), pos, opts);
  opts.jobs = 4;
  const auto four = synthesize_negatives(pair(), pos, opts);
  ASSERT_EQ(one.records.size(), four.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    EXPECT_EQ(negative_record_json(one.records[i]), negative_record_json(four.records[i]));
  }
}

TEST_F(Synthesis, NegativesLoseMomentum) {
  const auto pos = positives(500);
  const ContrastPair p = pair();
  const auto result = synthesize_negatives(p, pos, options());
  ASSERT_GE(result.records.size(), 500U);
  std::vector<double> src, neg;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    src.push_back(momentum_trace(p, pos[i].seq).sum());
    const auto& m = result.records[i].manipulated;
    // A regeneration may delete the whole document; only the end step remains.
    neg.push_back(m.empty() ? p.expert().next_logprobs({})[Vocabulary::kEos] - p.amateur().next_logprobs({})[Vocabulary::kEos]
                            : momentum_trace(p, m).sum());
  }
  EXPECT_LT(welch_greater_pvalue(src, neg), 0.01);
}

TEST_F(Synthesis, StrongerAmateurYieldsHarderNegatives) {
  const auto pos = positives(300);
  const auto& expert = *models_->at(4);
  auto mean_rate = [&](int amateur) {
    const auto r = resample_baseline(models_->at(amateur), pos, options());
    double total = 0.0;
    for (const auto& rec : r.records) {
      total += sequence_logprob(expert, rec.manipulated) / static_cast<double>(rec.manipulated.size() + 1);
    }
    return total / static_cast<double>(r.records.size());
  };
  EXPECT_GT(mean_rate(3), mean_rate(1));
}

TEST_F(Synthesis, TooManySkipsIsARunError) {
  StrategyRegistry registry = StrategyRegistry::with_builtins();
  // Fails for every fifth positive.
  registry.add("flaky", [](const TokenSequence& s, Rng& rng) {
    if (s.ids.size() % 5 == 0) throw ArgumentError("flaky selector");
    return select_mask(s, "segment-single", rng);
  });
  auto pos = positives(200);
  auto opts = options("flaky");
  opts.registry = &registry;
  std::size_t failing = 0;
  for (const auto& p : pos) failing += p.seq.ids.size() % 5 == 0;
  ASSERT_GT(failing, 20U);
  EXPECT_THROW(synthesize_negatives(pair(), pos, opts), RunError);

  opts.max_skip_fraction = 0.5;
  const auto r = synthesize_negatives(pair(), pos, opts);
  EXPECT_EQ(r.skipped.size(), failing);
  EXPECT_EQ(r.records.size(), pos.size() - failing);
}

TEST_F(Synthesis, UnauditedPairWarns) {
  auto opts = options();
  opts.audit_passed = false;
  const auto r = synthesize_negatives(pair(), positives(3), opts);
  EXPECT_FALSE(r.warnings.empty());
}

}  // namespace
}  // namespace cdm
