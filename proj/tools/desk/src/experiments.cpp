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

#include "experiments.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "cdm/degradation.hpp"
#include "cdm/discriminator.hpp"
#include "cdm/negatives.hpp"
#include "cdm/parallel.hpp"
#include "cdm/pooling.hpp"
#include "cdm/random.hpp"
#include "cdm/stats.hpp"
#include "world.hpp"

namespace cdm::desk {
namespace {

constexpr std::size_t kTrainPositives = 1000;
constexpr std::size_t kTestPerClass = 1000;
constexpr std::size_t kSwaps = 1;

std::vector<FeatureVector> featurize_all(const Featurizer& f, const std::vector<TokenSequence>& seqs,
                                         std::size_t jobs) {
  std::vector<FeatureVector> out(seqs.size());
  parallel_for(seqs.size(), jobs, [&](std::size_t i) { out[i] = f.featurize(seqs[i]); });
  return out;
}

std::vector<LabeledFeatures> label(const std::string& prefix, std::vector<FeatureVector> fv) {
  std::vector<LabeledFeatures> out;
  out.reserve(fv.size());
  for (std::size_t i = 0; i < fv.size(); ++i) out.push_back({prefix + std::to_string(i), std::move(fv[i])});
  return out;
}

}  // namespace

SeparationResult discriminative_separation(std::uint64_t seed, std::size_t per_class, std::size_t jobs) {
  const World w = make_world(seed, {1, 4}, {});
  const ContrastPair pair(w.plain.at(4), w.plain.at(1));
  const auto clean = fresh_documents(w, per_class, Rng::for_task(seed, "separation-clean").next_u64());

  DegradationConfig cfg;
  cfg.gamma = 1.0;
  std::vector<TokenSequence> degraded(per_class);
  parallel_for(per_class, jobs, [&](std::size_t i) {
    Rng rng = Rng::for_task(seed, "separation-degraded-" + std::to_string(i));
    auto s = sample_degraded(pair, {}, cfg, rng);
    degraded[i].ids = std::move(s.tokens);
  });

  std::vector<double> a(per_class), b(per_class);
  parallel_for(per_class, jobs, [&](std::size_t i) {
    a[i] = pool(momentum_trace(pair, clean[i]), PoolingStrategy::kAvg).score;
    b[i] = degraded[i].empty() ? 0.0 : pool(momentum_trace(pair, degraded[i]), PoolingStrategy::kAvg).score;
  });
  // An empty sample still has one step, the end marker.
  for (std::size_t i = 0; i < per_class; ++i) {
    if (degraded[i].empty()) {
      const double lp_e = pair.expert().next_logprob({}, Vocabulary::kEos);
      const double lp_a = pair.amateur().next_logprob({}, Vocabulary::kEos);
      b[i] = lp_e - lp_a;
    }
  }
  SeparationResult r;
  std::vector<double> scores = a;
  scores.insert(scores.end(), b.begin(), b.end());
  std::vector<int> labels(per_class, 1);
  labels.resize(2 * per_class, 0);
  r.auc = auc(scores, labels);
  r.p_value = welch_greater_pvalue(a, b);
  r.mean_clean = stable_mean(a);
  r.mean_degraded = stable_mean(b);
  return r;
}

TransferResult negative_transfer(std::uint64_t seed, int cdm_amateur_order, std::size_t jobs) {
  // A higher-entropy chain than the bundled one: on the bundled chain every
  // arm detects swaps at AUC >= 0.99 and the comparison is at its ceiling.
  MarkovSpec spec;
  spec.seed = seed;
  spec.branching = 32;
  spec.weight_profile.clear();
  for (int i = 0; i < spec.branching; ++i) spec.weight_profile.push_back(std::pow(0.8, i));
  const World w = make_world(spec, {1, 2, 3, 4}, {});
  const ContrastPair feature_pair(w.plain.at(4), w.plain.at(1));
  const Featurizer featurizer(feature_pair, FeatureConfig{});

  const auto train_docs = fresh_documents(w, kTrainPositives, Rng::for_task(seed, "transfer-train").next_u64());
  const auto test_clean = fresh_documents(w, kTestPerClass, Rng::for_task(seed, "transfer-clean").next_u64());
  const auto swap_src = fresh_documents(w, kTestPerClass, Rng::for_task(seed, "transfer-swap").next_u64());
  std::vector<TokenSequence> test_swapped;
  for (std::size_t i = 0; i < swap_src.size(); ++i) {
    test_swapped.push_back(random_swaps(swap_src[i], kSwaps, Rng::for_task(seed, i).next_u64()));
  }

  std::vector<PositiveExample> positives;
  for (std::size_t i = 0; i < train_docs.size(); ++i) positives.push_back({"p" + std::to_string(i), train_docs[i]});
  const auto pos_features = label("p", featurize_all(featurizer, train_docs, jobs));

  std::vector<FeatureVector> test_features = featurize_all(featurizer, test_clean, jobs);
  for (auto& f : featurize_all(featurizer, test_swapped, jobs)) test_features.push_back(std::move(f));
  std::vector<int> test_labels(kTestPerClass, 1);
  test_labels.resize(2 * kTestPerClass, 0);

  auto evaluate_arm = [&](const SynthesisResult& synth) {
    std::vector<TokenSequence> negs;
    for (const auto& rec : synth.records) negs.push_back(rec.manipulated);
    const auto neg_features = label("n", featurize_all(featurizer, negs, jobs));
    DiscriminatorConfig dc;
    dc.seed = seed;
    const auto model = train_discriminator(pos_features, neg_features, featurizer.config_hash(), dc);
    std::vector<double> scores;
    scores.reserve(test_features.size());
    for (const auto& f : test_features) scores.push_back(model.score(f));
    return auc(scores, test_labels);
  };

  SynthesisOptions opts;
  opts.strategy = "segment-single";
  opts.degradation.seed = seed;
  opts.jobs = jobs;
  opts.audit_passed = true;
  // n-gram infillers see only the suffix tail of a PSM prompt, so the
  // prefix-conditioned mode is the more faithful one here.
  opts.mode = RegenerationMode::kSuffixBlind;

  TransferResult r;
  {
    const ContrastPair pair(w.plain.at(4), w.plain.at(cdm_amateur_order));
    opts.degradation.gamma = 1.0;
    r.cdm_auc = evaluate_arm(synthesize_negatives(pair, positives, opts));
  }
  opts.degradation.gamma = 0.0;
  for (int order : {1, 2, 3}) {
    r.resample_auc[order] = evaluate_arm(resample_baseline(w.plain.at(order), positives, opts));
  }
  return r;
}

}  // namespace cdm::desk
