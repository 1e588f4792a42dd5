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

#include "cdm/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"
#include "cdm/random.hpp"
#include "json.hpp"

namespace cdm {
namespace {

constexpr const char* kMagic = "cdm-discriminator";
constexpr int kFormatVersion = 1;

// Standardized input: dense block scaled, hashed block unit-normalized.
struct Prepared {
  std::array<double, kDenseFeatures> dense{};
  std::vector<std::pair<std::uint32_t, double>> hashed;
  double sq_norm = 0.0;  // including the bias coordinate
};

Prepared prepare(const FeatureVector& x, const std::array<double, kDenseFeatures>& mean,
                 const std::array<double, kDenseFeatures>& scale) {
  Prepared p;
  p.sq_norm = 1.0;
  for (std::size_t d = 0; d < kDenseFeatures; ++d) {
    p.dense[d] = (x.dense[d] - mean[d]) / scale[d];
    p.sq_norm += p.dense[d] * p.dense[d];
  }
  double hn = 0.0;
  for (const auto& [idx, v] : x.hashed) hn += v * v;
  p.hashed = x.hashed;
  if (hn > 0.0) {
    const double inv = 1.0 / std::sqrt(hn);
    for (auto& e : p.hashed) e.second *= inv;
    p.sq_norm += 1.0;
  }
  return p;
}

double linear(const std::vector<double>& w, double b, const Prepared& p) {
  double z = b;
  for (std::size_t d = 0; d < kDenseFeatures; ++d) z += w[d] * p.dense[d];
  for (const auto& [idx, v] : p.hashed) z += w[kDenseFeatures + idx] * v;
  return z;
}

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

struct Example {
  const LabeledFeatures* src;
  int label;
};

}  // namespace

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  return 1.0 - 1.0 / (1.0 + std::exp(z));
}

double LinearDiscriminator::logit(const FeatureVector& x) const {
  if (weights.size() < kDenseFeatures) throw ArgumentError("discriminator has no weights");
  for (const auto& [idx, v] : x.hashed) {
    if (kDenseFeatures + idx >= weights.size()) {
      throw CompatibilityError("feature index outside the discriminator's layout");
    }
  }
  return linear(weights, bias, prepare(x, dense_mean, dense_scale));
}

double LinearDiscriminator::score(const FeatureVector& x) const { return logistic(logit(x)); }

double LinearDiscriminator::score(const Featurizer& featurizer, const TokenSequence& s) const {
  if (featurizer.config_hash() != feature_hash || featurizer.dimension() != weights.size()) {
    throw CompatibilityError("featurizer " + to_hex(featurizer.config_hash()) +
                             " does not match discriminator " + to_hex(feature_hash));
  }
  return score(featurizer.featurize(s));
}

LinearDiscriminator LinearDiscriminator::negated() const {
  LinearDiscriminator out = *this;
  for (auto& w : out.weights) w = -w;
  out.bias = -bias;
  return out;
}

LinearDiscriminator train_discriminator(std::span<const LabeledFeatures> positives,
                                        std::span<const LabeledFeatures> negatives,
                                        std::uint64_t feature_hash,
                                        const DiscriminatorConfig& config,
                                        DiscriminatorReport* report) {
  if (positives.empty() || negatives.empty()) {
    throw TrainingError("discriminator training needs both positive and negative examples");
  }
  if (!(config.l2 >= 0.0) || config.epochs < 1 || !(config.validation_fraction >= 0.0) ||
      !(config.validation_fraction < 1.0)) {
    throw ArgumentError("invalid discriminator configuration");
  }
  std::unordered_set<std::string> pos_ids;
  for (const auto& p : positives) pos_ids.insert(p.id);
  for (const auto& n : negatives) {
    if (pos_ids.count(n.id) != 0U) throw ArgumentError("id '" + n.id + "' is both positive and negative");
  }
  const std::size_t hashed_dim = config.hashed_dim;
  if (hashed_dim == 0) throw ArgumentError("hashed_dim must be positive");
  for (const auto* set : {&positives, &negatives}) {
    for (const auto& e : *set) {
      for (const auto& [idx, v] : e.features.hashed) {
        if (idx >= hashed_dim) throw ArgumentError("hashed feature index exceeds hashed_dim");
      }
    }
  }

  // Stratified seeded split.
  Rng rng(config.seed);
  std::vector<Example> train, validation;
  for (int label : {1, 0}) {
    const auto& set = label == 1 ? positives : negatives;
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
    const auto n_val = set.size() < 2 ? std::size_t{0}
                                       : static_cast<std::size_t>(std::llround(config.validation_fraction *
                                                                               static_cast<double>(set.size())));
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_val ? validation : train).push_back({&set[order[i]], label});
    }
  }

  LinearDiscriminator model;
  model.l2 = config.l2;
  model.feature_hash = feature_hash;
  model.epochs = config.epochs;
  model.seed = config.seed;
  for (std::size_t d = 0; d < kDenseFeatures; ++d) {
    double mean = 0.0;
    for (const auto& e : train) mean += e.src->features.dense[d];
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const auto& e : train) {
      const double dv = e.src->features.dense[d] - mean;
      var += dv * dv;
    }
    const double sd = std::sqrt(var / static_cast<double>(train.size()));
    model.dense_mean[d] = mean;
    model.dense_scale[d] = sd > 1e-12 ? sd : 1.0;
  }

  std::vector<Prepared> xs;
  xs.reserve(train.size());
  std::vector<double> cw(train.size());
  double n_pos = 0.0;
  for (const auto& e : train) n_pos += e.label;
  const double n_all = static_cast<double>(train.size());
  const double n_neg = n_all - n_pos;
  double weight_total = 0.0, lipschitz = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    xs.push_back(prepare(train[i].src->features, model.dense_mean, model.dense_scale));
    cw[i] = n_all / (2.0 * (train[i].label == 1 ? n_pos : n_neg));
    weight_total += cw[i];
    lipschitz += cw[i] * xs.back().sq_norm;
  }
  lipschitz = 0.25 * lipschitz / weight_total + config.l2;
  const double step = 1.0 / lipschitz;

  const std::size_t dim = kDenseFeatures + hashed_dim;
  model.weights.assign(dim, 0.0);
  std::vector<double> grad(dim);

  auto objective = [&](bool want_grad) {
    double loss = 0.0, grad_b = 0.0;
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double z = linear(model.weights, model.bias, xs[i]);
      const double y = train[i].label;
      // Loss for label y on logit z: softplus(-z) if y = 1, softplus(z) if y = 0.
      loss += cw[i] * (y == 1.0 ? softplus_neg(z) : softplus_neg(-z));
      if (!want_grad) continue;
      const double r = cw[i] * (logistic(z) - y) / weight_total;
      grad_b += r;
      for (std::size_t d = 0; d < kDenseFeatures; ++d) grad[d] += r * xs[i].dense[d];
      for (const auto& [idx, v] : xs[i].hashed) grad[kDenseFeatures + idx] += r * v;
    }
    loss /= weight_total;
    double sq = 0.0;
    for (double w : model.weights) sq += w * w;
    loss += 0.5 * config.l2 * sq;
    if (want_grad) {
      for (std::size_t d = 0; d < dim; ++d) grad[d] += config.l2 * model.weights[d];
    }
    return std::pair{loss, grad_b};
  };

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto [loss, grad_b] = objective(true);
    if (!std::isfinite(loss)) throw TrainingError("discriminator loss diverged");
    history.push_back(loss);
    for (std::size_t d = 0; d < dim; ++d) model.weights[d] -= step * grad[d];
    model.bias -= step * grad_b;
  }
  const double final_loss = objective(false).first;

  if (report != nullptr) {
    report->loss_history = std::move(history);
    report->final_loss = final_loss;
    report->train_size = train.size();
    report->validation_size = validation.size();
    report->validation_accuracy = 0.0;
    report->validation_auc = 0.0;
    if (!validation.empty()) {
      std::vector<double> scores;
      std::vector<int> labels;
      std::size_t correct = 0;
      for (const auto& e : validation) {
        const double s = model.score(e.src->features);
        scores.push_back(s);
        labels.push_back(e.label);
        if ((s >= 0.5) == (e.label == 1)) ++correct;
      }
      report->validation_accuracy = static_cast<double>(correct) / static_cast<double>(validation.size());
      const bool both = std::any_of(labels.begin(), labels.end(), [](int l) { return l == 1; }) &&
                        std::any_of(labels.begin(), labels.end(), [](int l) { return l == 0; });
      if (both) report->validation_auc = auc(scores, labels);
    }
  }
  return model;
}

std::string serialize_discriminator(const LinearDiscriminator& d) {
  nlohmann::ordered_json body;
  body["feature_hash"] = to_hex(d.feature_hash);
  body["dimension"] = d.weights.size();
  body["l2"] = d.l2;
  body["epochs"] = d.epochs;
  body["seed"] = d.seed;
  body["bias"] = d.bias;
  body["dense_mean"] = d.dense_mean;
  body["dense_scale"] = d.dense_scale;
  auto sparse = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d.weights.size(); ++i) {
    if (d.weights[i] != 0.0) sparse.push_back({i, d.weights[i]});
  }
  body["weights"] = std::move(sparse);
  const std::string text = body.dump();
  nlohmann::ordered_json doc;
  doc["magic"] = kMagic;
  doc["format_version"] = kFormatVersion;
  doc["checksum"] = to_hex(fnv1a(text));
  doc["body"] = body;
  return doc.dump(1) + "\n";
}

LinearDiscriminator deserialize_discriminator(const std::string& data) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(data);
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(std::string("discriminator file is truncated or corrupt: ") + e.what());
  }
  if (!doc.is_object() || doc.value("magic", std::string{}) != kMagic) {
    throw FormatError("not a discriminator file");
  }
  if (doc.value("format_version", -1) != kFormatVersion) {
    throw FormatError("unsupported discriminator format version");
  }
  if (!doc.contains("body") || !doc.contains("checksum")) throw ChecksumError("discriminator file is incomplete");
  const auto& body = doc["body"];
  if (to_hex(fnv1a(body.dump())) != doc["checksum"].get<std::string>()) {
    throw ChecksumError("discriminator checksum mismatch");
  }
  try {
    LinearDiscriminator d;
    d.feature_hash = std::stoull(body.at("feature_hash").get<std::string>(), nullptr, 16);
    d.weights.assign(body.at("dimension").get<std::size_t>(), 0.0);
    d.l2 = body.at("l2").get<double>();
    d.epochs = body.at("epochs").get<int>();
    d.seed = body.at("seed").get<std::uint64_t>();
    d.bias = body.at("bias").get<double>();
    d.dense_mean = body.at("dense_mean").get<std::array<double, kDenseFeatures>>();
    d.dense_scale = body.at("dense_scale").get<std::array<double, kDenseFeatures>>();
    for (const auto& e : body.at("weights")) {
      const auto idx = e.at(0).get<std::size_t>();
      if (idx >= d.weights.size()) throw FormatError("weight index out of range");
      d.weights[idx] = e.at(1).get<double>();
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed discriminator body: ") + e.what());
  }
}

void save_discriminator(const LinearDiscriminator& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << serialize_discriminator(d);
  if (!out) throw IngestionError("failed writing " + path.string());
}

LinearDiscriminator load_discriminator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_discriminator(ss.str());
}

}  // namespace cdm
