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

#include "commands.hpp"

#include <csignal>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>

#include <spdlog/spdlog.h>

#include "app.hpp"
#include "cdm/audit.hpp"
#include "cdm/corpus.hpp"
#include "cdm/desk/desk.hpp"
#include "cdm/discriminator.hpp"
#include "cdm/error.hpp"
#include "cdm/features.hpp"
#include "cdm/fim.hpp"
#include "cdm/mock_server.hpp"
#include "cdm/model_io.hpp"
#include "cdm/momentum.hpp"
#include "cdm/negatives.hpp"
#include "cdm/ngram_model.hpp"
#include "cdm/parallel.hpp"
#include "cdm/pooling.hpp"
#include "cdm/random.hpp"
#include "cdm/remote.hpp"
#include "cdm/report.hpp"
#include "cdm/scoring.hpp"
#include "cdm/synthetic.hpp"
#include "json.hpp"

namespace cdm::cli {
namespace {

using json = nlohmann::ordered_json;

std::ofstream open_out(const Manifest& m, const std::string& name) {
  std::ofstream out(m.path_of(name), std::ios::trunc);
  if (!out) throw IngestionError("cannot write " + m.path_of(name).string());
  return out;
}

bool is_remote(const std::string& spec) { return spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0; }

LanguageModelHandle load_handle(const std::string& spec, const std::string& vocab_from, Manifest& m) {
  if (!is_remote(spec)) {
    m.add_input(spec);
    return std::make_shared<NgramModel>(load_model(spec));
  }
  const auto hash = spec.find('#');
  if (hash == std::string::npos || hash + 1 == spec.size()) {
    throw ArgumentError("remote model '" + spec + "' must be http://host:port#model");
  }
  if (vocab_from.empty()) throw ArgumentError("remote model '" + spec + "' needs --vocab-from");
  m.add_input(vocab_from);
  auto vocab = load_model(vocab_from).shared_vocabulary();
  auto config = RemoteEndpointConfig::from_env(spec.substr(0, hash), spec.substr(hash + 1));
  return std::make_shared<RemoteLanguageModel>(config, std::move(vocab));
}

ContrastPair load_pair(const Settings& s, Manifest& m) {
  auto expert = load_handle(s.expert, s.vocab_from, m);
  auto amateur = load_handle(s.amateur, s.vocab_from, m);
  return ContrastPair(std::move(expert), std::move(amateur));
}

std::vector<TokenSequence> encode_all(const Vocabulary& vocab, const std::vector<Document>& docs) {
  std::vector<TokenSequence> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(encode_document(vocab, d, OovPolicy::kUnknown));
  return out;
}

std::vector<TokenSequence> read_sequences(const std::string& path, const Vocabulary& vocab, Manifest& m) {
  m.add_input(path);
  return encode_all(vocab, read_documents(path));
}

void write_documents(const Manifest& m, const std::string& name, const Vocabulary& vocab,
                     const std::vector<TokenSequence>& docs) {
  auto out = open_out(m, name);
  for (const auto& d : docs) out << decode(vocab, d.ids) << '\n';
}

RegenerationMode parse_mode(const std::string& mode) {
  if (mode == "fim") return RegenerationMode::kFillInMiddle;
  if (mode == "suffix-blind") return RegenerationMode::kSuffixBlind;
  throw ArgumentError("unknown --mode '" + mode + "' (expected fim or suffix-blind)");
}

std::vector<LabeledFeatures> featurize_all(const Featurizer& f, const std::vector<std::string>& ids,
                                           const std::vector<TokenSequence>& seqs, std::size_t jobs) {
  std::vector<LabeledFeatures> out(seqs.size());
  parallel_for(seqs.size(), jobs, [&](std::size_t i) {
    out[i].id = ids[i];
    out[i].features = f.featurize(seqs[i]);
  });
  return out;
}

}  // namespace

int gen_corpus(const Settings& s, Manifest& m) {
  m.add_seed("corpus", s.gen_corpus.seed);
  const auto corpus = make_bundled_corpus(s.gen_corpus.seed, s.gen_corpus.train_tokens, s.gen_corpus.heldout_tokens);
  write_documents(m, "train.txt", *corpus.vocab, corpus.train);
  write_documents(m, "heldout.txt", *corpus.vocab, corpus.heldout);
  m.add_output("train.txt");
  m.add_output("heldout.txt");
  m.add_stage("generate", "ok");
  spdlog::info("wrote {} train and {} held-out documents", corpus.train.size(), corpus.heldout.size());
  return kExitOk;
}

int train_lm(const Settings& s, Manifest& m) {
  const auto& o = s.train_lm;
  m.add_input(o.corpus);
  const auto docs = read_documents(o.corpus);
  TokenizerOptions tok;
  tok.lowercase = o.lowercase;

  std::shared_ptr<Vocabulary> vocab;
  std::vector<TokenSequence> seqs;
  if (!s.vocab_from.empty()) {
    m.add_input(s.vocab_from);
    vocab = std::make_shared<Vocabulary>(load_model(s.vocab_from).vocabulary());
    for (const auto& d : docs) seqs.push_back(encode_document(std::as_const(*vocab), d, OovPolicy::kUnknown, tok));
  } else {
    vocab = std::make_shared<Vocabulary>();
    for (const auto& d : docs) seqs.push_back(encode_document(*vocab, d, OovPolicy::kExtend, tok));
  }
  if (o.fim_copies < 0) throw ArgumentError("--fim-copies must be >= 0");
  if (o.fim_copies > 0) {
    m.add_seed("fim", o.seed);
    Rng rng(o.seed);
    seqs = make_fim_training_corpus(seqs, o.fim_copies, rng);
  }

  TrainOptions opts;
  opts.order = o.order;
  opts.smoothing.weights = o.weights;
  opts.smoothing.additive = o.additive;
  opts.identity = o.identity;
  if (opts.identity.empty()) opts.identity = (o.fim_copies > 0 ? "ngram-fim-" : "ngram-") + std::to_string(o.order);
  const NgramModel model = train_ngram(seqs, vocab, opts);
  save_model(model, m.path_of("model.cdmlm"));
  m.add_output("model.cdmlm");
  m.add_stage("train", "ok");
  spdlog::info("trained {} on {} sequences, vocabulary {}", model.identity(), seqs.size(), vocab->size());
  return kExitOk;
}

int audit_order(const Settings& s, Manifest& m) {
  const auto& o = s.audit;
  std::vector<LanguageModelHandle> family;
  std::vector<TokenSequence> heldout;
  if (!o.models.empty()) {
    for (const auto& path : o.models) family.push_back(load_handle(path, s.vocab_from, m));
    if (o.heldout.empty()) throw ArgumentError("--models requires --heldout");
    heldout = read_sequences(o.heldout, family.front()->vocabulary(), m);
  } else {
    std::shared_ptr<Vocabulary> vocab;
    std::vector<TokenSequence> train;
    if (!o.corpus.empty()) {
      m.add_input(o.corpus);
      vocab = std::make_shared<Vocabulary>();
      for (const auto& d : read_documents(o.corpus)) train.push_back(encode_document(*vocab, d, OovPolicy::kExtend));
      if (o.heldout.empty()) throw ArgumentError("--corpus requires --heldout");
      heldout = read_sequences(o.heldout, *vocab, m);
    } else {
      m.add_seed("corpus", o.seed);
      auto corpus = make_bundled_corpus(o.seed);
      vocab = corpus.vocab;
      train = std::move(corpus.train);
      heldout = o.heldout.empty() ? std::move(corpus.heldout) : read_sequences(o.heldout, *vocab, m);
    }
    for (int order : o.orders) {
      TrainOptions opts;
      opts.order = order;
      family.push_back(std::make_shared<NgramModel>(train_ngram(train, vocab, opts)));
    }
  }
  const AuditReport report = partial_order_audit(family, heldout);
  open_out(m, "audit.json") << report.to_json() << '\n';
  m.add_output("audit.json");
  m.add_stage("audit", report.passed ? "passed" : "failed");
  for (const auto& e : report.entries) std::cout << e.identity << "\tperplexity " << e.perplexity << '\n';
  std::cout << "partial-order audit: " << (report.passed ? "PASS" : "FAIL") << '\n';
  for (const auto& w : report.warnings) spdlog::warn("{}", w);
  return report.passed ? kExitOk : kExitFailure;
}

int synth_negatives(const Settings& s, Manifest& m) {
  const auto& o = s.synth;
  const ContrastPair pair = load_pair(s, m);
  m.add_input(o.positives);
  const auto docs = read_documents(o.positives);
  std::vector<PositiveExample> positives;
  positives.reserve(docs.size());
  for (const auto& d : docs) positives.push_back({d.id, encode_document(pair.vocabulary(), d, OovPolicy::kUnknown)});

  SynthesisOptions opts;
  opts.strategy = o.strategy;
  opts.degradation.gamma = o.baseline ? 0.0 : o.gamma;
  opts.degradation.top_p = o.top_p;
  opts.degradation.temperature = o.temperature;
  opts.degradation.seed = o.seed;
  opts.mode = parse_mode(o.mode);
  opts.jobs = s.jobs;
  opts.max_attempts = o.max_attempts;
  m.add_seed("synthesis", o.seed);

  if (!o.audit_heldout.empty()) {
    const auto heldout = read_sequences(o.audit_heldout, pair.vocabulary(), m);
    const std::vector<LanguageModelHandle> family = {pair.amateur_handle(), pair.expert_handle()};
    const AuditReport audit = partial_order_audit(family, heldout);
    open_out(m, "audit.json") << audit.to_json() << '\n';
    m.add_output("audit.json");
    m.add_stage("audit", audit.passed ? "passed" : "failed");
    opts.audit_passed = audit.passed;
  }

  const SynthesisResult result = o.baseline ? resample_baseline(pair.amateur_handle(), positives, opts)
                                            : synthesize_negatives(pair, positives, opts);
  {
    auto out = open_out(m, "negatives.jsonl");
    for (const auto& r : result.records) out << negative_record_json(r) << '\n';
  }
  m.add_output("negatives.jsonl");
  m.add_stage("synthesize", result.skipped.empty() ? "ok" : std::to_string(result.skipped.size()) + " skipped");
  spdlog::info("wrote {} negatives, skipped {}", result.records.size(), result.skipped.size());
  return kExitOk;
}

int train_discriminator_cmd(const Settings& s, Manifest& m) {
  const auto& o = s.train_disc;
  const ContrastPair pair = load_pair(s, m);
  const Vocabulary& vocab = pair.vocabulary();

  m.add_input(o.positives);
  const auto pos_docs = read_documents(o.positives);
  std::vector<std::string> pos_ids;
  for (const auto& d : pos_docs) pos_ids.push_back(d.id);
  const auto pos_seqs = encode_all(vocab, pos_docs);

  m.add_input(o.negatives);
  std::vector<std::string> neg_ids;
  std::vector<TokenSequence> neg_seqs;
  {
    std::ifstream in(o.negatives);
    if (!in) throw IngestionError("cannot open " + o.negatives);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      NegativeSampleRecord r;
      try {
        r = parse_negative_record(line);
      } catch (const Error& e) {
        throw IngestionError(o.negatives + ":" + std::to_string(line_no) + ": " + e.what());
      }
      neg_ids.push_back(r.source_id + "#neg");
      neg_seqs.push_back(encode_text(vocab, r.manipulated_text, OovPolicy::kUnknown));
    }
  }

  FeatureConfig fc;
  fc.hash_bits = o.hash_bits;
  fc.max_ngram = o.max_ngram;
  const Featurizer featurizer(pair, fc);
  const auto pos = featurize_all(featurizer, pos_ids, pos_seqs, s.jobs);
  const auto neg = featurize_all(featurizer, neg_ids, neg_seqs, s.jobs);

  DiscriminatorConfig config;
  config.l2 = o.l2;
  config.epochs = o.epochs;
  config.seed = o.seed;
  config.validation_fraction = o.validation_fraction;
  config.hashed_dim = fc.hashed_dim();
  m.add_seed("split", o.seed);
  DiscriminatorReport report;
  const auto d = train_discriminator(pos, neg, featurizer.config_hash(), config, &report);
  save_discriminator(d, m.path_of("discriminator.json"));
  m.add_output("discriminator.json");

  json r;
  r["train_size"] = report.train_size;
  r["validation_size"] = report.validation_size;
  r["final_loss"] = report.final_loss;
  r["validation_accuracy"] = report.validation_accuracy;
  r["validation_auc"] = report.validation_auc;
  r["loss_history"] = report.loss_history;
  open_out(m, "train_report.json") << r.dump(2) << '\n';
  m.add_output("train_report.json");
  m.add_stage("train", "ok");
  spdlog::info("validation accuracy {:.4f}, AUC {:.4f}", report.validation_accuracy, report.validation_auc);
  return kExitOk;
}

int train_pooler_cmd(const Settings& s, Manifest& m) {
  const auto& o = s.train_pooler;
  const ContrastPair pair = load_pair(s, m);
  m.add_input(o.dataset);
  const AnnotatedDataset data = read_annotated_dataset(o.dataset);
  std::vector<MomentumTrace> traces(data.records.size());
  std::vector<double> targets;
  for (const auto& r : data.records) {
    const auto it = r.scores.find(o.aspect);
    if (it == r.scores.end()) throw ArgumentError("record '" + r.doc.id + "' has no score for aspect '" + o.aspect + "'");
    targets.push_back(it->second);
  }
  parallel_for(traces.size(), s.jobs, [&](std::size_t i) {
    const auto& doc = data.records[i].doc;
    traces[i] = momentum_trace(pair, encode_document(pair.vocabulary(), doc, OovPolicy::kUnknown), doc.id);
  });

  PoolerConfig config;
  config.l2 = o.l2;
  config.seed = o.seed;
  config.target_source = o.target_source;
  m.add_seed("pooler", o.seed);
  PoolerReport report;
  const PoolerModel pooler = train_pooler(traces, targets, config, &report);
  save_pooler(pooler, m.path_of("pooler.json"));
  m.add_output("pooler.json");
  json r;
  r["train_size"] = pooler.train_size;
  r["train_rmse"] = report.train_rmse;
  r["train_r2"] = report.train_r2;
  r["rank_deficient"] = report.rank_deficient;
  r["warnings"] = report.warnings;
  open_out(m, "train_report.json") << r.dump(2) << '\n';
  m.add_output("train_report.json");
  m.add_stage("train", "ok");
  return kExitOk;
}

int score(const Settings& s, Manifest& m) {
  const auto& o = s.score;
  const ContrastPair pair = load_pair(s, m);
  m.add_input(o.dataset);
  const auto docs = read_documents(o.dataset);

  if (!o.discriminator.empty()) {
    m.add_input(o.discriminator);
    const auto d = load_discriminator(o.discriminator);
    FeatureConfig fc;
    fc.hash_bits = o.hash_bits;
    fc.max_ngram = o.max_ngram;
    const Featurizer featurizer(pair, fc);
    std::vector<double> scores(docs.size());
    std::vector<std::size_t> lengths(docs.size());
    parallel_for(docs.size(), s.jobs, [&](std::size_t i) {
      const auto seq = encode_document(pair.vocabulary(), docs[i], OovPolicy::kUnknown);
      lengths[i] = seq.size();
      scores[i] = d.score(featurizer, seq);
    });
    auto out = open_out(m, "scores.jsonl");
    for (std::size_t i = 0; i < docs.size(); ++i) {
      json j;
      j["id"] = docs[i].id;
      j["strategy"] = "discriminator";
      j["score"] = scores[i];
      j["len"] = lengths[i];
      out << j.dump() << '\n';
    }
    m.add_output("scores.jsonl");
    m.add_stage("score", "ok");
    return kExitOk;
  }

  ScoringOptions opts;
  opts.strategy = parse_pooling(o.pooling);
  opts.jobs = s.jobs;
  PoolerModel pooler;
  if (opts.strategy == PoolingStrategy::kClassifier) {
    if (o.pooler.empty()) throw ArgumentError("--pooling classifier requires --pooler");
    m.add_input(o.pooler);
    pooler = load_pooler(o.pooler);
    opts.pooler = &pooler;
  }
  const auto checkpoint = m.path_of("scores.jsonl");
  if (!o.resume) std::filesystem::remove(checkpoint);
  opts.checkpoint = checkpoint;
  const ScoringResult result = score_dataset(pair, docs, opts);
  m.add_output("scores.jsonl");
  m.add_stage("score", result.skipped_ids.empty() ? "ok" : std::to_string(result.skipped_ids.size()) + " skipped");

  if (o.traces) {
    std::vector<std::string> lines(docs.size());
    parallel_for(docs.size(), s.jobs, [&](std::size_t i) {
      const auto seq = encode_document(pair.vocabulary(), docs[i], OovPolicy::kUnknown);
      lines[i] = trace_json(momentum_trace(pair, seq, docs[i].id), pair.vocabulary());
    });
    auto out = open_out(m, "traces.jsonl");
    for (const auto& l : lines) out << l << '\n';
    m.add_output("traces.jsonl");
  }
  spdlog::info("scored {} documents ({} resumed, {} skipped)", result.scores.size(), result.resumed,
               result.skipped_ids.size());
  return kExitOk;
}

int evaluate(const Settings& s, Manifest& m) {
  const auto& o = s.evaluate;
  m.add_input(o.dataset);
  const AnnotatedDataset data = read_annotated_dataset(o.dataset);
  MetricScores metrics;
  for (const auto& entry : o.scores) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) throw ArgumentError("--scores expects NAME=PATH, got '" + entry + "'");
    const std::string name = entry.substr(0, eq);
    const std::string path = entry.substr(eq + 1);
    m.add_input(path);
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path);
    auto& table = metrics[name];
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        table[j.at("id").get<std::string>()] = j.at("score").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw IngestionError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  const CorrelationReport report = evaluate_metrics(data, metrics);
  open_out(m, "report.json") << report.to_json() << '\n';
  open_out(m, "report.txt") << report.to_text();
  m.add_output("report.json");
  m.add_output("report.txt");
  std::cout << report.to_text();
  const bool ok = report.all_defined();
  m.add_stage("evaluate", ok ? "ok" : "undefined correlation");
  if (!ok) spdlog::error("at least one correlation is undefined");
  return ok ? kExitOk : kExitFailure;
}

int repro_desk(const Settings& s, Manifest& m) {
  desk::DeskOptions options;
  options.seed = s.desk.seed;
  options.jobs = s.jobs;
  m.add_seed("desk", s.desk.seed);
  std::vector<int> ids = s.desk.criteria.empty() ? desk::criteria_ids() : s.desk.criteria;
  std::vector<desk::CriterionResult> results;
  std::vector<double> seconds;
  bool all = true;
  for (int id : ids) {
    spdlog::info("criterion {}: {}", id, desk::criterion_title(id));
    const auto t0 = std::chrono::steady_clock::now();
    results.push_back(desk::run_criterion(id, options));
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    all = all && results.back().passed;
    m.add_stage("criterion-" + std::to_string(id), results.back().passed ? "pass" : "fail");
  }
  open_out(m, "report.json") << desk::results_json(results, options);
  m.add_output("report.json");
  std::cout << desk::results_table(results, seconds);
  return all ? kExitOk : kExitFailure;
}

int serve_mock(const Settings& s) {
  auto model = std::make_shared<NgramModel>(load_model(s.serve.model));
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  MockServer server(model, s.serve.name);
  server.start(s.serve.port);
  std::cout << server.base_url() << std::endl;
  spdlog::info("serving {} as '{}' on {}", model->identity(), s.serve.name, server.base_url());
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, stopping after {} requests", sig, server.requests_served());
  server.stop();
  return kExitOk;
}

}  // namespace cdm::cli
