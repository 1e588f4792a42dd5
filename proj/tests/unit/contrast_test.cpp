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
#include <functional>

#include "cdm/audit.hpp"
#include "cdm/degradation.hpp"
#include "cdm/error.hpp"
#include "cdm/momentum.hpp"
#include "cdm/secant.hpp"
#include "cdm/synthetic.hpp"
#include "test_models.hpp"

namespace cdm {
namespace {

using testing::fixed_model;
using testing::letters;
using testing::random_markov_model;
using testing::seq;

TEST(ContrastPair, RejectsMismatchedVocabularies) {
  auto a = fixed_model(letters(2), "a", {0.5, 0.5});
  auto b = fixed_model(letters(3), "b", {0.2, 0.3, 0.5});
  EXPECT_THROW(ContrastPair(a, b), ConfigurationError);
}

TEST(ContrastPair, RejectsSameIdentityUnlessAllowed) {
  auto v = letters(2);
  auto a = fixed_model(v, "same", {0.5, 0.5});
  EXPECT_THROW(ContrastPair(a, a), ConfigurationError);
  EXPECT_NO_THROW(ContrastPair(a, a, true));
}

TEST(Momentum, IdenticalModelsGiveZero) {
  auto m = random_markov_model(letters(3), "m", 2, 4);
  const ContrastPair pair(m, m, true);
  const auto trace = momentum_trace(pair, seq({7, 8, 9, 7}));
  ASSERT_EQ(trace.size(), 5U);
  for (const auto& s : trace.steps) EXPECT_EQ(s.momentum, 0.0);
}

TEST(Momentum, HandEvaluatedStep) {
  auto v = letters(2);
  const ContrastPair pair(fixed_model(v, "e", {0.8, 0.2}), fixed_model(v, "a", {0.5, 0.5}));
  EXPECT_NEAR(momentum_trace(pair, seq({7})).steps[0].momentum, std::log(1.6), 1e-12);
  EXPECT_NEAR(std::log(1.6), 0.4700, 5e-5);
}

TEST(Momentum, TraceIsExactDifferenceAndSumsToLogprobGap) {
  auto v = letters(4);
  const ContrastPair pair(random_markov_model(v, "e", 2, 1), random_markov_model(v, "a", 1, 2));
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    TokenSequence s;
    const auto n = rng.uniform_int(1, 12);
    for (std::uint64_t k = 0; k < n; ++k) s.ids.push_back(static_cast<TokenId>(rng.uniform_int(7, 10)));
    const auto trace = momentum_trace(pair, s);
    ASSERT_EQ(trace.size(), s.size() + 1);
    for (const auto& st : trace.steps) EXPECT_EQ(st.momentum, st.lp_expert - st.lp_amateur);
    EXPECT_EQ(trace.steps.back().token, Vocabulary::kEos);
    const double gap = sequence_logprob(pair.expert(), s) - sequence_logprob(pair.amateur(), s);
    EXPECT_NEAR(trace.sum(), gap, 1e-12);
  }
  EXPECT_THROW(momentum_trace(pair, TokenSequence{}), ArgumentError);
}

TEST(Degradation, TwoTokenExample) {
  auto v = letters(2);
  const ContrastPair pair(fixed_model(v, "e", {0.8, 0.2}), fixed_model(v, "a", {0.5, 0.5}));
  DegradationConfig cfg;
  cfg.gamma = 1.0;
  const auto lp = degraded_next_dist(pair, {}, cfg);
  // p_a^2 / p_e = 0.3125 and 1.25 before normalizing.
  const double z = 0.3125 + 1.25;
  EXPECT_NEAR(std::exp(lp[7]), 0.3125 / z, 1e-12);
  EXPECT_NEAR(std::exp(lp[8]), 1.25 / z, 1e-12);
  EXPECT_NEAR(std::exp(lp[7]), 0.2, 1e-12);
  EXPECT_NEAR(std::exp(lp[8]), 0.8, 1e-12);
}

TEST(Degradation, GammaZeroAndIdenticalModelsReturnAmateur) {
  auto v = letters(4);
  auto e = random_markov_model(v, "e", 2, 3);
  auto a = random_markov_model(v, "a", 1, 4);
  const ContrastPair pair(e, a);
  const ContrastPair twin(a, a, true);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<TokenId> ctx(rng.uniform_int(0, 5));
    for (auto& t : ctx) t = static_cast<TokenId>(rng.uniform_int(7, 10));
    const auto pa = a->next_logprobs(ctx);
    DegradationConfig zero;
    zero.gamma = 0.0;
    const auto p0 = degraded_next_dist(pair, ctx, zero);
    for (std::size_t t = 0; t < pa.size(); ++t) EXPECT_LT(std::abs(std::exp(p0[t]) - std::exp(pa[t])), 1e-12);
    for (double g : kGammaSweep) {
      DegradationConfig cfg;
      cfg.gamma = g;
      const auto pt = degraded_next_dist(twin, ctx, cfg);
      double mass = 0.0;
      for (std::size_t t = 0; t < pa.size(); ++t) {
        EXPECT_LT(std::abs(std::exp(pt[t]) - std::exp(pa[t])), 1e-12);
        mass += std::exp(degraded_next_dist(pair, ctx, cfg)[t]);
      }
      EXPECT_NEAR(mass, 1.0, 1e-9);
    }
  }
}

TEST(Degradation, ConfigValidation) {
  DegradationConfig c;
  c.gamma = -0.1;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.top_p = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c.top_p = 1.5;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.temperature = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.top_p = 1.0;
  EXPECT_NO_THROW(c.validate());
}

TEST(Degradation, TopPKeepsOnlyTheAmateurNucleus) {
  auto v = letters(4);
  const ContrastPair pair(fixed_model(v, "e", {0.25, 0.25, 0.25, 0.25}), fixed_model(v, "a", {0.6, 0.3, 0.07, 0.03}));
  DegradationConfig cfg;
  cfg.top_p = 0.85;
  const auto lp = degraded_next_dist(pair, {}, cfg);
  EXPECT_EQ(lp[9], kLogProbFloor);
  EXPECT_EQ(lp[10], kLogProbFloor);
  EXPECT_NEAR(std::exp(lp[7]) + std::exp(lp[8]), 1.0, 1e-12);
}

TEST(Degradation, SamplingFrequenciesMatchDistribution) {
  auto v = letters(4);
  const ContrastPair pair(random_markov_model(v, "e", 1, 21, 1.0), random_markov_model(v, "a", 1, 22, 1.0));
  DegradationConfig cfg;
  cfg.gamma = 1.0;
  cfg.max_length = 1;
  cfg.content_only = false;
  const std::vector<TokenId> ctx = {7, 9};
  std::vector<double> p = degraded_next_dist(pair, ctx, cfg);
  for (auto& x : p) x = std::exp(x);
  std::vector<double> freq(p.size(), 0.0);
  Rng rng(99);
  constexpr int kSamples = 100'000;
  for (int i = 0; i < kSamples; ++i) {
    const auto s = sample_degraded(pair, ctx, cfg, rng);
    freq[s.tokens.empty() ? Vocabulary::kEos : s.tokens[0]] += 1.0 / kSamples;
  }
  double tv = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) tv += 0.5 * std::abs(freq[t] - p[t]);
  EXPECT_LT(tv, 0.01);
}

TEST(Degradation, GammaZeroSamplesLikeTheAmateur) {
  auto v = letters(4);
  auto a = random_markov_model(v, "a", 2, 5, 1.0);
  const ContrastPair pair(random_markov_model(v, "e", 2, 6), a);
  DegradationConfig cfg;
  cfg.gamma = 0.0;
  cfg.content_only = false;
  cfg.max_length = 12;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r1(seed), r2(seed);
    const std::vector<TokenId> prefix = {8};
    const auto d = sample_degraded(pair, prefix, cfg, r1);
    const auto s = sample_sequence(*a, prefix, cfg.max_length, r2);
    EXPECT_EQ(d.tokens, s.tokens);
    EXPECT_EQ(d.truncated, s.truncated);
  }
}

TEST(Degradation, AgreeingModelsKeepTheirContinuation) {
  auto v = letters(3);
  auto peaked = [&](std::string id, double other) {
    return std::make_shared<testing::FunctionModel>(v, std::move(id), [other](std::span<const TokenId> ctx) {
      std::vector<double> lp(10, other);
      lp[ctx.size() < 3 ? 8 : Vocabulary::kEos] = 0.0;
      return lp;
    });
  };
  const ContrastPair pair(peaked("e", -30.0), peaked("a", -25.0));
  DegradationConfig cfg;
  cfg.gamma = 0.1;
  const auto out = sample_degraded(pair, {}, cfg, *std::make_unique<Rng>(3));
  EXPECT_EQ(out.tokens, (std::vector<TokenId>{8, 8, 8}));
  EXPECT_FALSE(out.truncated);
}

TEST(Degradation, LengthCapSetsTruncationFlag) {
  auto v = letters(2);
  const ContrastPair pair(fixed_model(v, "e", {0.5, 0.5}), fixed_model(v, "a", {0.4, 0.6}));
  DegradationConfig cfg;
  cfg.max_length = 3;
  Rng rng(1);
  const auto out = sample_degraded(pair, {}, cfg, rng);
  EXPECT_EQ(out.tokens.size(), 3U);
  EXPECT_TRUE(out.truncated);
}

// KL over the event space of EOS-terminated sequences shorter than `len`
// plus length-`len` truncation events.
double kl_oracle(const LanguageModel& p, const LanguageModel& q, std::size_t len) {
  const std::size_t v = p.vocabulary().size();
  double kl = 0.0;
  std::vector<TokenId> prefix;
  std::function<void(double, double)> walk = [&](double lp, double lq) {
    if (prefix.size() == len) {
      kl += std::exp(lp) * (lp - lq);
      return;
    }
    const auto np = p.next_logprobs(prefix);
    const auto nq = q.next_logprobs(prefix);
    const double ep = lp + np[Vocabulary::kEos], eq = lq + nq[Vocabulary::kEos];
    kl += std::exp(ep) * (ep - eq);
    for (TokenId t = 0; t < v; ++t) {
      if (t == Vocabulary::kEos) continue;
      prefix.push_back(t);
      walk(lp + np[t], lq + nq[t]);
      prefix.pop_back();
    }
  };
  walk(0.0, 0.0);
  return kl;
}

TEST(Secant, ExactEstimatesAreSignedKullbackLeibler) {
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    auto v = letters(2 + static_cast<int>(trial % 2));
    auto e = random_markov_model(v, "e", 2, 100 + trial, 1.0);
    auto a = random_markov_model(v, "a", 1, 200 + trial, 1.0);
    const ContrastPair pair(e, a);
    EnumerationSpec spec;
    spec.max_length = 3;
    const auto ee = secant_estimate_exact(*e, pair, spec);
    const auto ea = secant_estimate_exact(*a, pair, spec);
    EXPECT_TRUE(ee.exact);
    const double kl_ea = kl_oracle(*e, *a, 3);
    const double kl_ae = kl_oracle(*a, *e, 3);
    EXPECT_NEAR(ee.value, kl_ea, 1e-10);
    EXPECT_NEAR(ea.value, -kl_ae, 1e-10);
    EXPECT_GE(ee.value, 0.0);
    EXPECT_LE(ea.value, 0.0);
    EXPECT_GT(ee.value - ea.value, 0.0);
  }
}

TEST(Secant, BudgetRefusalReportsSize) {
  auto v = letters(3);
  auto e = random_markov_model(v, "e", 1, 1);
  auto a = random_markov_model(v, "a", 1, 2);
  const ContrastPair pair(e, a);
  EnumerationSpec spec;
  spec.max_length = 6;
  spec.budget = 1000;
  try {
    secant_estimate_exact(*e, pair, spec);
    FAIL();
  } catch (const EnumerationBudgetError& err) {
    EXPECT_NEAR(err.estimated_size(), enumeration_size(v->size(), 6), 0.5);
    EXPECT_GT(err.estimated_size(), 1000.0);
  }
}

TEST(Secant, MonteCarloCoversExactValue) {
  auto v = letters(2);
  auto e = random_markov_model(v, "e", 2, 31, 1.0);
  auto a = random_markov_model(v, "a", 1, 32, 1.0);
  const ContrastPair pair(e, a);
  EnumerationSpec es;
  es.max_length = 3;
  const double exact = secant_estimate_exact(*e, pair, es).value;
  int covered = 0;
  constexpr int kTrials = 40;
  for (int t = 0; t < kTrials; ++t) {
    MonteCarloSpec ms;
    ms.samples = 2000;
    ms.max_length = 3;
    ms.seed = static_cast<std::uint64_t>(t);
    const auto mc = secant_estimate_monte_carlo(*e, pair, ms);
    EXPECT_GT(mc.standard_error, 0.0);
    if (std::abs(mc.value - exact) <= 3.0 * mc.standard_error) ++covered;
  }
  EXPECT_GE(covered, kTrials - 2);
}

class Audit : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { corpus_ = new SyntheticCorpus(make_bundled_corpus(7)); }
  static void TearDownTestSuite() { delete corpus_; }
  static LanguageModelHandle train(int order, std::size_t docs) {
    TrainOptions o;
    o.order = order;
    const std::span<const TokenSequence> part(corpus_->train.data(), std::min(docs, corpus_->train.size()));
    return std::make_shared<NgramModel>(train_ngram(part, corpus_->vocab, o));
  }
  static SyntheticCorpus* corpus_;
};
SyntheticCorpus* Audit::corpus_ = nullptr;

TEST_F(Audit, IncreasingOrdersPass) {
  const std::vector<LanguageModelHandle> family = {train(1, 1u << 30), train(2, 1u << 30), train(4, 1u << 30)};
  const auto r = partial_order_audit(family, corpus_->heldout);
  ASSERT_EQ(r.entries.size(), 3U);
  EXPECT_GT(r.entries[0].perplexity, r.entries[1].perplexity);
  EXPECT_GT(r.entries[1].perplexity, r.entries[2].perplexity);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.violations.empty());
}

TEST_F(Audit, SingleModelPassesWithWarning) {
  const std::vector<LanguageModelHandle> family = {train(2, 1u << 30)};
  const auto r = partial_order_audit(family, corpus_->heldout);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(r.warnings.empty());
}

TEST_F(Audit, StarvedModelIsFlaggedNotThrown) {
  const std::size_t one_percent = corpus_->train.size() / 100;
  const std::vector<LanguageModelHandle> family = {train(2, 1u << 30), train(4, one_percent)};
  AuditReport r;
  ASSERT_NO_THROW(r = partial_order_audit(family, corpus_->heldout));
  EXPECT_FALSE(r.passed);
  ASSERT_EQ(r.violations.size(), 1U);
  EXPECT_EQ(r.violations[0].lower, 0U);
  EXPECT_EQ(r.violations[0].higher, 1U);
  EXPECT_LE(r.violations[0].lower_perplexity, r.violations[0].higher_perplexity);
}

TEST_F(Audit, MismatchedVocabularyIsConfigurationError) {
  auto other = testing::fixed_model(letters(2), "x", {0.5, 0.5});
  const std::vector<LanguageModelHandle> family = {train(1, 1u << 30), other};
  EXPECT_THROW(partial_order_audit(family, corpus_->heldout), ConfigurationError);
}

}  // namespace
}  // namespace cdm
