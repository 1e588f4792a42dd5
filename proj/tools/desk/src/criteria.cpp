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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cdm/audit.hpp"
#include "cdm/degradation.hpp"
#include "cdm/desk/desk.hpp"
#include "cdm/discriminator.hpp"
#include "cdm/error.hpp"
#include "cdm/fim.hpp"
#include "cdm/mock_server.hpp"
#include "cdm/negatives.hpp"
#include "cdm/ngram_model.hpp"
#include "cdm/pooling.hpp"
#include "cdm/random.hpp"
#include "cdm/remote.hpp"
#include "cdm/scoring.hpp"
#include "cdm/secant.hpp"
#include "cdm/stats.hpp"
#include "experiments.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "world.hpp"

namespace cdm::desk {
namespace {

struct CriterionInfo {
  int id;
  const char* title;
  double budget;
};

constexpr CriterionInfo kCriteria[] = {
    {1, "gamma-identity", 5.0},
    {2, "normalization", 10.0},
    {3, "secant guarantee", 120.0},
    {4, "partial-order audit", 60.0},
    {5, "discriminative separation", 120.0},
    {6, "generative vs resampling", 300.0},
    {7, "statistics oracle", 10.0},
    {8, "loopback fidelity", 60.0},
    {9, "pooling contracts", 5.0},
};

const CriterionInfo& info(int id) {
  for (const auto& c : kCriteria) {
    if (c.id == id) return c;
  }
  throw ArgumentError("unknown criterion " + std::to_string(id));
}

CriterionResult start(int id) {
  CriterionResult r;
  r.id = id;
  r.title = info(id).title;
  return r;
}

void add(CriterionResult& r, std::string name, double value) { r.metrics.push_back({std::move(name), value}); }

// Fails the criterion on the first failed check and records which.
void check(CriterionResult& r, bool ok, const std::string& what) {
  if (!ok && r.detail.empty()) r.detail = what;
}

void finish(CriterionResult& r) {
  r.passed = r.detail.empty();
  if (r.passed) r.detail = "ok";
}

std::vector<TokenId> random_context(Rng& rng, const Vocabulary& vocab, std::size_t max_len) {
  const auto len = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_len)));
  std::vector<TokenId> ctx(len);
  for (auto& t : ctx) {
    t = static_cast<TokenId>(rng.uniform_int(Vocabulary::kNumReserved, static_cast<std::int64_t>(vocab.size()) - 1));
  }
  return ctx;
}

// A small trained pair over a random chain: `content` tokens, random
// orders, sharing one vocabulary.
struct SmallPair {
  std::shared_ptr<Vocabulary> vocab;
  LanguageModelHandle expert;
  LanguageModelHandle amateur;
};

SmallPair small_pair(std::uint64_t seed, int content, std::size_t tokens, std::size_t min_len, std::size_t max_len) {
  Rng rng(seed);
  MarkovSpec spec;
  spec.seed = seed;
  spec.vocab_size = content;
  spec.order = static_cast<int>(rng.uniform_int(1, 2));
  spec.branching = std::max(2, content / 2);
  spec.min_doc_length = min_len;
  spec.max_doc_length = max_len;
  const auto corpus = make_corpus(spec, tokens, 1);
  SmallPair p;
  p.vocab = corpus.vocab;
  const int amateur_order = static_cast<int>(rng.uniform_int(1, 2));
  const int expert_order = amateur_order + static_cast<int>(rng.uniform_int(1, 2));
  TrainOptions eo, ao;
  eo.order = expert_order;
  ao.order = amateur_order;
  eo.identity = "expert-" + std::to_string(seed);
  ao.identity = "amateur-" + std::to_string(seed);
  p.expert = std::make_shared<NgramModel>(train_ngram(corpus.train, p.vocab, eo));
  p.amateur = std::make_shared<NgramModel>(train_ngram(corpus.train, p.vocab, ao));
  return p;
}

double mass_error(const std::vector<double>& lps) {
  double total = 0.0;
  for (double lp : lps) total += std::exp(lp);
  return std::abs(total - 1.0);
}

CriterionResult gamma_identity(const DeskOptions& o) {
  auto r = start(1);
  constexpr int kPairs = 20;
  constexpr int kContexts = 50;
  double worst_lp = 0.0, worst_p = 0.0;
  for (int k = 0; k < kPairs; ++k) {
    const auto sp = small_pair(Rng::for_task(o.seed, "gamma-pair-" + std::to_string(k)).next_u64(),
                               8 + 4 * (k % 5), 3000, 4, 16);
    const ContrastPair pair(sp.expert, sp.amateur);
    Rng rng = Rng::for_task(o.seed, "gamma-ctx-" + std::to_string(k));
    DegradationConfig cfg;
    cfg.gamma = 0.0;
    for (int c = 0; c < kContexts; ++c) {
      const auto ctx = random_context(rng, *sp.vocab, 8);
      const auto got = degraded_next_dist(pair, ctx, cfg);
      const auto want = sp.amateur->next_logprobs(ctx);
      for (std::size_t i = 0; i < got.size(); ++i) {
        worst_lp = std::max(worst_lp, std::abs(got[i] - want[i]));
        worst_p = std::max(worst_p, std::abs(std::exp(got[i]) - std::exp(want[i])));
      }
    }
  }
  add(r, "cases", kPairs * kContexts);
  add(r, "max_abs_logprob_dev", worst_lp);
  add(r, "max_abs_prob_dev", worst_p);
  check(r, worst_lp < 1e-12 && worst_p < 1e-12, "gamma = 0 deviates from the amateur");
  finish(r);
  return r;
}

CriterionResult normalization(const DeskOptions& o) {
  auto r = start(2);
  const World w = make_world(o.seed, {1, 2, 3, 4}, {1, 4});
  const auto& vocab = *w.vocab;
  Rng rng = Rng::for_task(o.seed, "normalization");
  std::size_t queries = 0;
  double worst = 0.0;
  auto record = [&](const std::vector<double>& lps) {
    ++queries;
    worst = std::max(worst, mass_error(lps));
  };
  const std::vector<LanguageModelHandle> plain = {w.plain.at(1), w.plain.at(2), w.plain.at(3), w.plain.at(4)};
  for (int i = 0; i < 3000; ++i) {
    record(plain[static_cast<std::size_t>(i % 4)]->next_logprobs(random_context(rng, vocab, 12)));
  }
  for (int i = 0; i < 1500; ++i) {
    const auto& doc = w.heldout[static_cast<std::size_t>(i) % w.heldout.size()];
    const auto len = static_cast<std::int64_t>(doc.size());
    const auto start_pos = static_cast<std::size_t>(rng.uniform_int(0, len - 1));
    const auto span_len = static_cast<std::size_t>(rng.uniform_int(1, len - static_cast<std::int64_t>(start_pos)));
    auto prompt = fim_prompt(doc.ids, Span{start_pos, span_len});
    const auto extra = static_cast<std::size_t>(rng.uniform_int(0, 3));
    for (std::size_t e = 0; e < extra; ++e) prompt.push_back(doc.ids[(start_pos + e) % doc.ids.size()]);
    record((i % 2 == 0 ? w.fim.at(4) : w.fim.at(1))->next_logprobs(prompt));
  }
  const ContrastPair pair(w.plain.at(4), w.plain.at(1));
  for (int i = 0; i < 2000; ++i) {
    DegradationConfig cfg;
    cfg.gamma = i % 6 == 0 ? 0.0 : kGammaSweep[static_cast<std::size_t>(i) % kGammaSweep.size()];
    if (i % 2 == 1) cfg.top_p = 0.5 + 0.5 * rng.uniform();
    record(degraded_next_dist(pair, random_context(rng, vocab, 12), cfg));
  }
  for (int i = 0; i < 2000; ++i) {
    DegradationConfig cfg;
    cfg.gamma = kGammaSweep[static_cast<std::size_t>(i) % kGammaSweep.size()];
    cfg.temperature = 0.5 + 1.5 * rng.uniform();
    if (i % 3 == 0) cfg.top_p = 0.9;
    record(sampling_dist(pair, random_context(rng, vocab, 12), cfg));
  }
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(static_cast<std::size_t>(rng.uniform_int(2, 200)));
    for (auto& x : v) x = 30.0 * rng.normal();
    normalize_logprobs(v);
    record(v);
  }
  {
    MockServer server(w.plain.at(3), "normalization-model");
    server.start();
    RemoteEndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "normalization-model";
    const RemoteLanguageModel remote(cfg, w.vocab);
    for (int i = 0; i < 500; ++i) record(remote.next_logprobs(random_context(rng, vocab, 12)));
  }
  add(r, "queries", static_cast<double>(queries));
  add(r, "max_abs_mass_error", worst);
  check(r, queries == 10000, "query count is not 10^4");
  check(r, worst <= 1e-9, "a distribution does not sum to 1 within 1e-9");
  finish(r);
  return r;
}

CriterionResult secant(const DeskOptions& o) {
  auto r = start(3);
  constexpr int kPairs = 10;
  constexpr int kTrials = 200;
  constexpr std::size_t kSamples = 2000;
  constexpr std::size_t kLength = 4;
  double worst_identity = 0.0, worst_kl = 0.0, min_gap = std::numeric_limits<double>::infinity();
  double identical_gap = 0.0;
  std::vector<SmallPair> pairs;
  std::vector<double> exact_gap;
  for (int k = 0; k < kPairs; ++k) {
    pairs.push_back(small_pair(Rng::for_task(o.seed, "secant-pair-" + std::to_string(k)).next_u64(), 5, 2000, 1, 5));
    const auto& sp = pairs.back();
    const ContrastPair pair(sp.expert, sp.amateur);
    const EnumerationSpec spec{kLength, 2'000'000};
    const double e_e = secant_estimate_exact(*sp.expert, pair, spec).value;
    const double e_a = secant_estimate_exact(*sp.amateur, pair, spec).value;
    const auto oracle = brute_force_divergences(*sp.expert, *sp.amateur, kLength);
    worst_identity = std::max(worst_identity, std::abs((e_e - e_a) - oracle.symmetrized));
    worst_kl = std::max({worst_kl, std::abs(e_e - oracle.kl_expert_amateur), std::abs(-e_a - oracle.kl_amateur_expert)});
    min_gap = std::min(min_gap, e_e - e_a);
    exact_gap.push_back(e_e - e_a);
    // An independent copy with identical parameters.
    const auto twin = std::make_shared<NgramModel>(dynamic_cast<const NgramModel&>(*sp.expert));
    const ContrastPair same(sp.expert, twin, true);
    identical_gap = std::max(identical_gap, std::abs(secant_estimate_exact(*sp.expert, same, spec).value -
                                                     secant_estimate_exact(*twin, same, spec).value));
  }
  int covered = 0;
  for (int t = 0; t < kTrials; ++t) {
    const auto& sp = pairs[static_cast<std::size_t>(t % kPairs)];
    const ContrastPair pair(sp.expert, sp.amateur);
    const auto me = secant_estimate_monte_carlo(
        *sp.expert, pair, {kSamples, kLength, Rng::for_task(o.seed, "mc-e-" + std::to_string(t)).next_u64()});
    const auto ma = secant_estimate_monte_carlo(
        *sp.amateur, pair, {kSamples, kLength, Rng::for_task(o.seed, "mc-a-" + std::to_string(t)).next_u64()});
    const double se = std::sqrt(me.standard_error * me.standard_error + ma.standard_error * ma.standard_error);
    if (std::abs((me.value - ma.value) - exact_gap[static_cast<std::size_t>(t % kPairs)]) <= 3.0 * se) ++covered;
  }
  const double coverage = covered / static_cast<double>(kTrials);
  add(r, "max_abs_dev_symmetrized_kl", worst_identity);
  add(r, "max_abs_dev_directed_kl", worst_kl);
  add(r, "min_gap_distinct_pairs", min_gap);
  add(r, "max_gap_identical_pairs", identical_gap);
  add(r, "mc_coverage_3se", coverage);
  check(r, worst_identity <= 1e-10, "E(p_e) - E(p_a) differs from the symmetrized KL oracle");
  check(r, worst_kl <= 1e-10, "E(p_e) or E(p_a) differs from the directed KL oracle");
  check(r, min_gap > 0.0, "a distinct pair has a non-positive secant gap");
  check(r, identical_gap == 0.0, "an identical pair has a nonzero secant gap");
  check(r, coverage >= 0.99, "Monte-Carlo 3-SE coverage below 99%");
  finish(r);
  return r;
}

CriterionResult audit(const DeskOptions& o) {
  auto r = start(4);
  const World w = make_world(o.seed, {1, 2, 3, 4}, {});
  std::vector<LanguageModelHandle> family;
  for (int order : {1, 2, 3, 4}) family.push_back(w.plain.at(order));
  const auto report = partial_order_audit(family, w.heldout);
  std::size_t train_tokens = 0;
  for (const auto& s : w.train) train_tokens += s.size();
  add(r, "train_tokens", static_cast<double>(train_tokens));
  for (const auto& e : report.entries) add(r, "ppl_" + e.identity, e.perplexity);
  check(r, report.passed, "held-out perplexity is not strictly decreasing in order");
  finish(r);
  return r;
}

CriterionResult separation(const DeskOptions& o) {
  auto r = start(5);
  const auto s = discriminative_separation(o.seed, 500, o.jobs);
  add(r, "auc", s.auc);
  add(r, "welch_p", s.p_value);
  add(r, "mean_clean", s.mean_clean);
  add(r, "mean_degraded", s.mean_degraded);
  check(r, s.auc >= 0.80, "AUC below 0.80");
  check(r, s.p_value < 0.01, "one-sided p not below 0.01");
  finish(r);
  return r;
}

CriterionResult transfer(const DeskOptions& o) {
  auto r = start(6);
  constexpr int kSeeds = 5;
  constexpr int kCdmAmateur = 3;
  double cdm = 0.0;
  std::map<int, double> resample;
  for (int k = 0; k < kSeeds; ++k) {
    const auto t = negative_transfer(o.seed + static_cast<std::uint64_t>(k), kCdmAmateur, o.jobs);
    cdm += t.cdm_auc / kSeeds;
    for (const auto& [order, a] : t.resample_auc) resample[order] += a / kSeeds;
  }
  add(r, "cdm_auc_amateur3", cdm);
  for (const auto& [order, a] : resample) add(r, "resample_auc_amateur" + std::to_string(order), a);
  check(r, cdm > resample.at(kCdmAmateur), "CDM negatives do not beat resampling from the same amateur");
  check(r, resample.at(1) >= resample.at(2) && resample.at(2) >= resample.at(3),
        "resampling AUC increases with amateur order");
  finish(r);
  return r;
}

CriterionResult statistics(const DeskOptions& o) {
  auto r = start(7);
  Rng rng = Rng::for_task(o.seed, "statistics");
  double worst = 0.0;
  int vectors = 0;
  bool invariant = true;
  while (vectors < 1000) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(3, 30));
    const int levels = static_cast<int>(rng.uniform_int(2, 40));
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_int(0, levels)) / 8.0;
      y[i] = rng.uniform() < 0.3 ? static_cast<double>(rng.uniform_int(0, 5)) : rng.normal();
    }
    const auto constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
    };
    if (constant(x) || constant(y)) continue;
    ++vectors;
    const double rho = spearman(x, y).rho;
    worst = std::max(worst, std::abs(rho - naive_spearman(x, y)));
    std::vector<double> fx(n), gy(n);
    for (std::size_t i = 0; i < n; ++i) {
      fx[i] = std::exp(x[i]) + 3.0 * x[i];
      gy[i] = y[i] * y[i] * y[i] + y[i];
    }
    const double rho_t = spearman(fx, gy).rho;
    if (rho_t != rho) invariant = false;
  }
  bool clamp_ok = true;
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    const auto m = static_cast<std::size_t>(rng.uniform_int(1, 50));
    const double got = bonferroni(std::span<const double>(&p, 1), m).front();
    if (got != std::min(1.0, p * static_cast<double>(m))) clamp_ok = false;
  }
  add(r, "vectors", vectors);
  add(r, "max_abs_dev_rho", worst);
  add(r, "bonferroni_exact", clamp_ok ? 1.0 : 0.0);
  add(r, "monotone_invariance_exact", invariant ? 1.0 : 0.0);
  check(r, worst <= 1e-12, "spearman differs from the brute-force oracle");
  check(r, clamp_ok, "Bonferroni clamping is not exact");
  check(r, invariant, "rho changed under a strictly monotone transform");
  finish(r);
  return r;
}

CriterionResult loopback(const DeskOptions& o) {
  auto r = start(8);
  const World w = make_world(o.seed, {}, {1, 4});
  MockServer expert_server(w.fim.at(4), "desk-expert");
  MockServer amateur_server(w.fim.at(1), "desk-amateur");
  expert_server.start();
  amateur_server.start();
  RemoteEndpointConfig ec, ac;
  ec.base_url = expert_server.base_url();
  ec.model = "desk-expert";
  ac.base_url = amateur_server.base_url();
  ac.model = "desk-amateur";
  const auto remote_expert = std::make_shared<RemoteLanguageModel>(ec, w.vocab);
  const auto remote_amateur = std::make_shared<RemoteLanguageModel>(ac, w.vocab);
  const ContrastPair local(w.fim.at(4), w.fim.at(1));
  const ContrastPair remote(remote_expert, remote_amateur);

  constexpr std::size_t kDocs = 40;
  std::vector<TokenSequence> docs(w.heldout.begin(), w.heldout.begin() + kDocs);

  double trace_dev = 0.0, pool_dev = 0.0, dist_dev = 0.0, score_dev = 0.0, disc_dev = 0.0;
  for (const auto& d : docs) {
    const auto lt = momentum_trace(local, d);
    const auto rt = momentum_trace(remote, d);
    for (std::size_t i = 0; i < lt.size(); ++i) {
      trace_dev = std::max({trace_dev, std::abs(lt.steps[i].lp_expert - rt.steps[i].lp_expert),
                            std::abs(lt.steps[i].lp_amateur - rt.steps[i].lp_amateur),
                            std::abs(lt.steps[i].momentum - rt.steps[i].momentum)});
    }
    for (auto s : {PoolingStrategy::kSum, PoolingStrategy::kAvg, PoolingStrategy::kMin, PoolingStrategy::kMax}) {
      pool_dev = std::max(pool_dev, std::abs(pool(lt, s).score - pool(rt, s).score));
    }
    DegradationConfig cfg;
    const auto ld = degraded_next_dist(local, d.ids, cfg);
    const auto rd = degraded_next_dist(remote, d.ids, cfg);
    for (std::size_t i = 0; i < ld.size(); ++i) dist_dev = std::max(dist_dev, std::abs(ld[i] - rd[i]));
  }

  std::vector<Document> dataset;
  for (std::size_t i = 0; i < docs.size(); ++i) dataset.push_back({"d" + std::to_string(i), decode(*w.vocab, docs[i].ids), {}});
  ScoringOptions so;
  so.jobs = o.jobs;
  const auto ls = score_dataset(local, dataset, so);
  const auto rs = score_dataset(remote, dataset, so);
  bool scores_aligned = ls.scores.size() == rs.scores.size();
  for (std::size_t i = 0; scores_aligned && i < ls.scores.size(); ++i) {
    scores_aligned = ls.scores[i].id == rs.scores[i].id;
    score_dev = std::max(score_dev, std::abs(ls.scores[i].score - rs.scores[i].score));
  }

  std::vector<PositiveExample> positives;
  for (std::size_t i = 0; i < docs.size(); ++i) positives.push_back({"d" + std::to_string(i), docs[i]});
  SynthesisOptions opts;
  opts.strategy = "mixed-multi";
  opts.degradation.gamma = 1.0;
  opts.degradation.seed = o.seed;
  opts.jobs = o.jobs;
  opts.audit_passed = true;
  const auto ln = synthesize_negatives(local, positives, opts);
  const auto rn = synthesize_negatives(remote, positives, opts);
  const auto lb = resample_baseline(w.fim.at(1), positives, opts);
  const auto rb = resample_baseline(remote_amateur, positives, opts);
  std::size_t negative_mismatches = 0;
  auto compare = [&](const SynthesisResult& a, const SynthesisResult& b) {
    if (a.records.size() != b.records.size()) {
      negative_mismatches += std::max(a.records.size(), b.records.size());
      return;
    }
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      const auto& x = a.records[i];
      const auto& y = b.records[i];
      bool same = x.source_id == y.source_id && x.manipulated.ids == y.manipulated.ids &&
                  x.edits.size() == y.edits.size();
      for (std::size_t e = 0; same && e < x.edits.size(); ++e) {
        same = x.edits[e].original.start == y.edits[e].original.start &&
               x.edits[e].original.length == y.edits[e].original.length &&
               x.edits[e].regenerated == y.edits[e].regenerated;
      }
      if (!same) ++negative_mismatches;
    }
  };
  compare(ln, rn);
  compare(lb, rb);

  const Featurizer lf(local, FeatureConfig{});
  const Featurizer rf(remote, FeatureConfig{});
  std::vector<LabeledFeatures> pos, neg;
  for (std::size_t i = 0; i < docs.size(); ++i) pos.push_back({"p" + std::to_string(i), lf.featurize(docs[i])});
  for (std::size_t i = 0; i < ln.records.size(); ++i) {
    neg.push_back({"n" + std::to_string(i), lf.featurize(ln.records[i].manipulated)});
  }
  DiscriminatorConfig dc;
  dc.seed = o.seed;
  const auto disc = train_discriminator(pos, neg, lf.config_hash(), dc);
  for (const auto& d : docs) disc_dev = std::max(disc_dev, std::abs(disc.score(lf.featurize(d)) - disc.score(rf.featurize(d))));
  for (const auto& rec : ln.records) {
    disc_dev = std::max(disc_dev, std::abs(disc.score(lf.featurize(rec.manipulated)) - disc.score(rf.featurize(rec.manipulated))));
  }

  add(r, "max_dev_trace", trace_dev);
  add(r, "max_dev_pooled", pool_dev);
  add(r, "max_dev_degraded_dist", dist_dev);
  add(r, "max_dev_scored_dataset", score_dev);
  add(r, "max_dev_discriminator", disc_dev);
  add(r, "negative_records", static_cast<double>(ln.records.size() + lb.records.size()));
  add(r, "negative_mismatches", static_cast<double>(negative_mismatches));
  const double tol = 1e-9;
  check(r, trace_dev <= tol, "momentum traces differ");
  check(r, pool_dev <= tol, "pooled scores differ");
  check(r, dist_dev <= tol, "degraded distributions differ");
  check(r, scores_aligned && score_dev <= tol, "scored datasets differ");
  check(r, negative_mismatches == 0 && !ln.records.empty(), "seeded negatives differ");
  check(r, disc_dev <= tol, "discriminator scores differ");
  finish(r);
  return r;
}

CriterionResult pooling_contracts(const DeskOptions& o) {
  auto r = start(9);
  Rng rng = Rng::for_task(o.seed, "pooling");
  std::size_t order_violations = 0, sum_violations = 0;
  constexpr int kTraces = 10000;
  for (int t = 0; t < kTraces; ++t) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 64));
    std::vector<double> v(len);
    const int kind = t % 4;
    const double c = 10.0 * rng.normal();
    for (auto& x : v) {
      switch (kind) {
        case 0: x = rng.normal(); break;
        case 1: x = c; break;
        case 2: x = 1e6 * rng.normal() + (rng.uniform() < 0.1 ? 1e-9 : 0.0); break;
        default: x = rng.uniform() < 0.2 ? -50.0 + rng.uniform() : 0.01 * rng.normal(); break;
      }
    }
    const double mn = pool_values(v, PoolingStrategy::kMin);
    const double avg = pool_values(v, PoolingStrategy::kAvg);
    const double mx = pool_values(v, PoolingStrategy::kMax);
    const double sum = pool_values(v, PoolingStrategy::kSum);
    if (!(mn <= avg && avg <= mx)) ++order_violations;
    if (sum != avg * static_cast<double>(len)) ++sum_violations;
  }
  add(r, "traces", kTraces);
  add(r, "order_violations", static_cast<double>(order_violations));
  add(r, "sum_violations", static_cast<double>(sum_violations));
  check(r, order_violations == 0, "min <= avg <= max violated");
  check(r, sum_violations == 0, "sum != avg * len");
  finish(r);
  return r;
}

}  // namespace

const std::vector<int>& criteria_ids() {
  static const std::vector<int> ids = [] {
    std::vector<int> out;
    for (const auto& c : kCriteria) out.push_back(c.id);
    return out;
  }();
  return ids;
}

std::string criterion_title(int id) { return info(id).title; }
double criterion_budget(int id) { return info(id).budget; }

CriterionResult run_criterion(int id, const DeskOptions& options) {
  switch (info(id).id) {
    case 1: return gamma_identity(options);
    case 2: return normalization(options);
    case 3: return secant(options);
    case 4: return audit(options);
    case 5: return separation(options);
    case 6: return transfer(options);
    case 7: return statistics(options);
    case 8: return loopback(options);
    default: return pooling_contracts(options);
  }
}

std::string results_json(const std::vector<CriterionResult>& results, const DeskOptions& options) {
  nlohmann::ordered_json doc;
  doc["seed"] = options.seed;
  auto arr = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& res : results) {
    nlohmann::ordered_json j;
    j["id"] = res.id;
    j["title"] = res.title;
    j["passed"] = res.passed;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& metric : res.metrics) m[metric.name] = metric.value;
    j["metrics"] = std::move(m);
    j["detail"] = res.detail;
    arr.push_back(std::move(j));
    all = all && res.passed;
  }
  doc["criteria"] = std::move(arr);
  doc["all_passed"] = all;
  return doc.dump(2) + "\n";
}

std::string results_table(const std::vector<CriterionResult>& results, const std::vector<double>& seconds) {
  std::string out = fmt::format("{:>2}  {:<26}  {:<4}  {:>9}  {}\n", "#", "criterion", "", "seconds", "detail");
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& res = results[i];
    const std::string secs = i < seconds.size() ? fmt::format("{:.2f}", seconds[i]) : "-";
    out += fmt::format("{:>2}  {:<26}  {:<4}  {:>9}  {}\n", res.id, res.title, res.passed ? "PASS" : "FAIL", secs,
                       res.detail);
  }
  return out;
}

}  // namespace cdm::desk
