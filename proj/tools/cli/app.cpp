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

#include "app.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cdm/error.hpp"
#include "cdm/masking.hpp"
#include "cdm/parallel.hpp"
#include "commands.hpp"
#include "settings.hpp"

namespace cdm::cli {
namespace {

void add_out_dir(CLI::App* sub, Settings& s) {
  sub->add_option("--out-dir", s.out_dir, "Directory for outputs, manifest.json and timing.json")->required();
}

void add_jobs(CLI::App* sub, Settings& s) {
  sub->add_option("--jobs", s.jobs, "Worker threads for data-parallel stages (0 = all cores)")
      ->capture_default_str();
}

void add_pair(CLI::App* sub, Settings& s) {
  sub->add_option("--expert", s.expert,
                  "Expert model: a model file, or http://host:port#name for a remote endpoint")
      ->required();
  sub->add_option("--amateur", s.amateur, "Amateur model, same forms as --expert")->required();
  sub->add_option("--vocab-from", s.vocab_from,
                  "Model file whose vocabulary is used for remote models");
}

}  // namespace

std::unique_ptr<CLI::App> make_app(Settings& s) {
  auto app = std::make_unique<CLI::App>("Contrastive distribution metrics: train, audit, synthesize, score, evaluate",
                                        "cdm");
  app->set_config("--config", "", "TOML config file; sections name subcommands, flags override it");
  app->add_option("--log-level", s.log_level, "Log level: trace, debug, info, warn, error, off")
      ->capture_default_str();
  app->require_subcommand(1);
  app->fallthrough();

  auto* gen = app->add_subcommand("gen-corpus", "Write the bundled synthetic Markov corpus as text files");
  gen->add_option("--seed", s.gen_corpus.seed, "Chain and sampling seed")->capture_default_str();
  gen->add_option("--train-tokens", s.gen_corpus.train_tokens, "Training tokens")->capture_default_str();
  gen->add_option("--heldout-tokens", s.gen_corpus.heldout_tokens, "Held-out tokens")->capture_default_str();
  add_out_dir(gen, s);

  auto* tlm = app->add_subcommand("train-lm", "Train a smoothed n-gram model");
  tlm->add_option("--corpus", s.train_lm.corpus, "Training documents (text or JSONL)")->required();
  tlm->add_option("--order", s.train_lm.order, "n-gram order")->capture_default_str();
  tlm->add_option("--fim-copies", s.train_lm.fim_copies,
                  "Fill-in-the-middle copies per document (0 = plain model)")
      ->capture_default_str();
  tlm->add_option("--weights", s.train_lm.weights, "Interpolation weights for orders 2..n (default 0.7 each)");
  tlm->add_option("--additive", s.train_lm.additive, "Add-delta constant of the unigram base")
      ->capture_default_str();
  tlm->add_option("--identity", s.train_lm.identity, "Model identity string (default ngram-<order>)");
  tlm->add_option("--vocab-from", s.vocab_from, "Reuse the vocabulary of this model file; new words map to <unk>");
  tlm->add_flag("--lowercase", s.train_lm.lowercase, "Lowercase text before tokenizing");
  tlm->add_option("--seed", s.train_lm.seed, "Seed for fill-in-the-middle span draws")->capture_default_str();
  add_out_dir(tlm, s);

  auto* aud = app->add_subcommand("audit-order", "Check that held-out perplexity falls with model capacity");
  aud->add_option("--models", s.audit.models, "Model files in increasing capacity");
  aud->add_option("--corpus", s.audit.corpus, "Training documents; trains one model per --orders entry");
  aud->add_option("--orders", s.audit.orders, "Orders to train when --corpus is given")->capture_default_str();
  aud->add_option("--heldout", s.audit.heldout, "Held-out documents");
  aud->add_option("--seed", s.audit.seed, "Bundled-corpus seed, used when neither --models nor --corpus is given")
      ->capture_default_str();
  add_out_dir(aud, s);

  auto* syn = app->add_subcommand("synth-negatives", "Synthesize negatives by regenerating spans of positives");
  add_pair(syn, s);
  syn->add_option("--positives", s.synth.positives, "Positive documents (text or JSONL)")->required();
  syn->add_option("--strategy", s.synth.strategy, "Span selector: segment-single, utterance-single, "
                                                  "mixed-single or mixed-multi")
      ->capture_default_str();
  syn->add_option("--gamma", s.synth.gamma, "Degradation strength (>= 0)")->capture_default_str();
  syn->add_option("--top-p", s.synth.top_p, "Keep the top-p amateur mass before contrasting (default off)");
  syn->add_option("--temperature", s.synth.temperature, "Sampling temperature")->capture_default_str();
  syn->add_option("--seed", s.synth.seed, "Base seed; each record derives its own stream")->capture_default_str();
  syn->add_option("--mode", s.synth.mode, "Regeneration mode: fim or suffix-blind")->capture_default_str();
  syn->add_flag("--baseline", s.synth.baseline, "Resample from the amateur alone (gamma fixed to 0)");
  syn->add_option("--audit-heldout", s.synth.audit_heldout,
                  "Held-out documents for a pre-flight audit of the pair (warns when omitted)");
  syn->add_option("--max-attempts", s.synth.max_attempts, "Redraws when a regeneration copies the source span")
      ->capture_default_str();
  add_jobs(syn, s);
  add_out_dir(syn, s);

  auto* tdi = app->add_subcommand("train-discriminator", "Train a linear discriminator on positives and negatives");
  add_pair(tdi, s);
  tdi->add_option("--positives", s.train_disc.positives, "Positive documents")->required();
  tdi->add_option("--negatives", s.train_disc.negatives, "negatives.jsonl from synth-negatives")->required();
  tdi->add_option("--l2", s.train_disc.l2, "L2 strength")->capture_default_str();
  tdi->add_option("--epochs", s.train_disc.epochs, "Gradient-descent epochs")->capture_default_str();
  tdi->add_option("--seed", s.train_disc.seed, "Validation-split seed")->capture_default_str();
  tdi->add_option("--validation-fraction", s.train_disc.validation_fraction, "Held-out fraction")
      ->capture_default_str();
  tdi->add_option("--hash-bits", s.train_disc.hash_bits, "log2 of the hashed n-gram dimension")
      ->capture_default_str();
  tdi->add_option("--max-ngram", s.train_disc.max_ngram, "Longest hashed n-gram")->capture_default_str();
  add_jobs(tdi, s);
  add_out_dir(tdi, s);

  auto* tpo = app->add_subcommand("train-pooler", "Fit the classifier pooler to annotated scores");
  add_pair(tpo, s);
  tpo->add_option("--dataset", s.train_pooler.dataset, "Annotated JSONL dataset")->required();
  tpo->add_option("--aspect", s.train_pooler.aspect, "Aspect whose scores are the targets")->required();
  tpo->add_option("--l2", s.train_pooler.l2, "Ridge strength")->capture_default_str();
  tpo->add_option("--seed", s.train_pooler.seed, "Recorded seed")->capture_default_str();
  tpo->add_option("--target-source", s.train_pooler.target_source,
                  "Where the targets come from, e.g. human or synthesized")
      ->capture_default_str();
  add_jobs(tpo, s);
  add_out_dir(tpo, s);

  auto* sco = app->add_subcommand("score", "Score documents by pooled momentum or a trained discriminator");
  add_pair(sco, s);
  sco->add_option("--dataset", s.score.dataset, "Documents to score (text or JSONL)")->required();
  sco->add_option("--pooling", s.score.pooling, "sum, avg, min, max or classifier")->capture_default_str();
  sco->add_option("--pooler", s.score.pooler, "Pooler model for --pooling classifier");
  sco->add_option("--discriminator", s.score.discriminator, "Score with this discriminator instead of pooling");
  sco->add_option("--hash-bits", s.score.hash_bits, "Feature layout for --discriminator")->capture_default_str();
  sco->add_option("--max-ngram", s.score.max_ngram, "Feature layout for --discriminator")->capture_default_str();
  sco->add_flag("--traces", s.score.traces, "Also write per-step momentum traces");
  sco->add_flag("--resume", s.score.resume, "Reuse scores already in the output directory");
  add_jobs(sco, s);
  add_out_dir(sco, s);

  auto* eva = app->add_subcommand("evaluate", "Spearman correlation of metric scores with human scores");
  eva->add_option("--dataset", s.evaluate.dataset, "Annotated JSONL dataset")->required();
  eva->add_option("--scores", s.evaluate.scores, "NAME=scores.jsonl, repeatable")->required();
  add_out_dir(eva, s);

  auto* desk = app->add_subcommand("repro-desk", "Run the desk-scale acceptance experiments");
  desk->add_option("--seed", s.desk.seed, "Base seed")->capture_default_str();
  desk->add_option("--criteria", s.desk.criteria, "Criterion numbers to run (default all)");
  add_jobs(desk, s);
  add_out_dir(desk, s);

  auto* srv = app->add_subcommand("serve-mock", "Serve a model over the remote protocol on 127.0.0.1");
  srv->add_option("--model", s.serve.model, "Model file")->required();
  srv->add_option("--name", s.serve.name, "Model name reported and required by the server")
      ->capture_default_str();
  srv->add_option("--port", s.serve.port, "Port (0 = any free port)")->capture_default_str();
  return app;
}

int run(int argc, char** argv) {
  Settings settings;
  auto app = make_app(settings);
  try {
    app->parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app->exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app->exit(e);
  } catch (const CLI::ParseError& e) {
    app->exit(e);
    return kExitUsage;
  }

  spdlog::drop("cdm");
  auto logger = spdlog::stderr_color_mt("cdm");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(settings.log_level));
  if (settings.jobs == 0) settings.jobs = default_jobs();

  CLI::App* sub = app->get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "serve-mock") return serve_mock(settings);
    std::filesystem::create_directories(settings.out_dir);
    Manifest manifest(*sub, settings.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    int code = kExitFailure;
    if (name == "gen-corpus") code = gen_corpus(settings, manifest);
    else if (name == "train-lm") code = train_lm(settings, manifest);
    else if (name == "audit-order") code = audit_order(settings, manifest);
    else if (name == "synth-negatives") code = synth_negatives(settings, manifest);
    else if (name == "train-discriminator") code = train_discriminator_cmd(settings, manifest);
    else if (name == "train-pooler") code = train_pooler_cmd(settings, manifest);
    else if (name == "score") code = score(settings, manifest);
    else if (name == "evaluate") code = evaluate(settings, manifest);
    else if (name == "repro-desk") code = repro_desk(settings, manifest);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.write(secs);
    return code;
  } catch (const Error& e) {
    std::cerr << "cdm " << name << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "cdm " << name << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace cdm::cli
