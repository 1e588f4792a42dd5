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

#include "cdm/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"
#include "json.hpp"

namespace cdm {
namespace {

constexpr const char* kMagic = "cdm-pooler";
constexpr int kFormatVersion = 1;
constexpr std::size_t kMinPairs = 10;

}  // namespace

const char* pooling_name(PoolingStrategy s) {
  switch (s) {
    case PoolingStrategy::kSum: return "sum";
    case PoolingStrategy::kAvg: return "avg";
    case PoolingStrategy::kMin: return "min";
    case PoolingStrategy::kMax: return "max";
    case PoolingStrategy::kClassifier: return "classifier";
  }
  return "unknown";
}

PoolingStrategy parse_pooling(std::string_view name) {
  for (auto s : {PoolingStrategy::kSum, PoolingStrategy::kAvg, PoolingStrategy::kMin,
                 PoolingStrategy::kMax, PoolingStrategy::kClassifier}) {
    if (name == pooling_name(s)) return s;
  }
  throw ArgumentError("unknown pooling strategy '" + std::string(name) +
                      "' (expected sum, avg, min, max or classifier)");
}

double pool_values(std::span<const double> values, PoolingStrategy strategy) {
  if (values.empty()) throw ArgumentError("cannot pool an empty trace");
  switch (strategy) {
    case PoolingStrategy::kSum:
      return stable_mean(values) * static_cast<double>(values.size());
    case PoolingStrategy::kAvg:
      return stable_mean(values);
    case PoolingStrategy::kMin:
      return *std::min_element(values.begin(), values.end());
    case PoolingStrategy::kMax:
      return *std::max_element(values.begin(), values.end());
    case PoolingStrategy::kClassifier:
      throw ArgumentError("classifier pooling requires a trained pooler model");
  }
  throw ArgumentError("unknown pooling strategy");
}

PooledScore pool(const MomentumTrace& trace, PoolingStrategy strategy) {
  const auto values = trace.values();
  return {trace.id, strategy, pool_values(values, strategy), trace.size()};
}

double PoolerModel::predict(const TraceSummary& summary) const {
  const auto x = summary.as_array();
  double y = bias;
  for (std::size_t i = 0; i < x.size(); ++i) y += weights[i] * (x[i] - feature_mean[i]) / feature_scale[i];
  return y;
}

PooledScore PoolerModel::pool(const MomentumTrace& trace) const {
  return {trace.id, PoolingStrategy::kClassifier, predict(summarize(trace)), trace.size()};
}

PoolerModel train_pooler(std::span<const MomentumTrace> traces, std::span<const double> targets,
                         const PoolerConfig& config, PoolerReport* report) {
  if (traces.size() != targets.size()) throw ArgumentError("traces and targets differ in count");
  if (traces.size() < kMinPairs) {
    throw ArgumentError("pooler training needs at least 10 (trace, target) pairs, got " +
                        std::to_string(traces.size()));
  }
  if (!(config.l2 >= 0.0)) throw ArgumentError("l2 must be non-negative");
  for (double t : targets) {
    if (!std::isfinite(t)) throw ArgumentError("pooler targets must be finite");
  }
  constexpr auto k = static_cast<Eigen::Index>(TraceSummary::kSize);
  const auto n = static_cast<Eigen::Index>(traces.size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = summarize(traces[static_cast<std::size_t>(i)]).as_array();
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
    y(i) = targets[static_cast<std::size_t>(i)];
  }

  PoolerModel model;
  model.l2 = config.l2;
  model.seed = config.seed;
  model.train_size = traces.size();
  model.target_source = config.target_source;
  std::vector<std::string> warnings;
  std::vector<bool> constant(TraceSummary::kSize, false);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().mean());
    const auto ju = static_cast<std::size_t>(j);
    model.feature_mean[ju] = mean;
    constant[ju] = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    model.feature_scale[ju] = constant[ju] ? 1.0 : sd;
    x.col(j) = constant[ju] ? Eigen::VectorXd::Zero(n)
                            : Eigen::VectorXd((x.col(j).array() - mean) / sd);
    if (constant[ju]) {
      warnings.push_back(std::string("summary feature '") + TraceSummary::names()[ju] +
                         "' is constant and was ignored");
    }
  }
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = x.transpose() * x / static_cast<double>(n);
  const Eigen::VectorXd rhs = x.transpose() * yc / static_cast<double>(n);

  // Rank check over the non-constant columns.
  bool deficient = false;
  {
    std::vector<Eigen::Index> live;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!constant[static_cast<std::size_t>(j)]) live.push_back(j);
    }
    if (!live.empty()) {
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(live.size()), static_cast<Eigen::Index>(live.size()));
      for (std::size_t a = 0; a < live.size(); ++a) {
        for (std::size_t b = 0; b < live.size(); ++b) {
          sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = gram(live[a], live[b]);
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      deficient = ev.minCoeff() <= 1e-12 * std::max(1.0, ev.maxCoeff());
    }
  }
  double lambda = config.l2;
  if (deficient) {
    lambda = std::max(lambda, 1e-8);
    warnings.emplace_back("summary features are collinear; using the regularized solution");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    gram(j, j) += constant[static_cast<std::size_t>(j)] ? 1.0 : lambda;
  }
  const Eigen::VectorXd w = gram.ldlt().solve(rhs);
  if (!w.allFinite()) throw TrainingError("pooler solve produced non-finite weights");
  for (Eigen::Index j = 0; j < k; ++j) model.weights[static_cast<std::size_t>(j)] = w(j);
  model.bias = y_mean;

  for (const auto& msg : warnings) spdlog::warn("train_pooler: {}", msg);
  if (report != nullptr) {
    const Eigen::VectorXd resid = x * w - yc;
    report->train_rmse = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    const double tss = yc.squaredNorm();
    report->train_r2 = tss > 0.0 ? 1.0 - resid.squaredNorm() / tss : 0.0;
    report->rank_deficient = deficient;
    report->warnings = warnings;
  }
  return model;
}

std::string serialize_pooler(const PoolerModel& p) {
  nlohmann::ordered_json body;
  body["features"] = TraceSummary::names();
  body["weights"] = p.weights;
  body["bias"] = p.bias;
  body["feature_mean"] = p.feature_mean;
  body["feature_scale"] = p.feature_scale;
  body["l2"] = p.l2;
  body["seed"] = p.seed;
  body["train_size"] = p.train_size;
  body["target_source"] = p.target_source;
  nlohmann::ordered_json doc;
  doc["magic"] = kMagic;
  doc["format_version"] = kFormatVersion;
  doc["checksum"] = to_hex(fnv1a(body.dump()));
  doc["body"] = body;
  return doc.dump(1) + "\n";
}

PoolerModel deserialize_pooler(const std::string& data) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(data);
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(std::string("pooler file is truncated or corrupt: ") + e.what());
  }
  if (!doc.is_object() || doc.value("magic", std::string{}) != kMagic) throw FormatError("not a pooler file");
  if (doc.value("format_version", -1) != kFormatVersion) throw FormatError("unsupported pooler format version");
  if (!doc.contains("body") || !doc.contains("checksum")) throw ChecksumError("pooler file is incomplete");
  const auto& body = doc["body"];
  if (to_hex(fnv1a(body.dump())) != doc["checksum"].get<std::string>()) {
    throw ChecksumError("pooler checksum mismatch");
  }
  try {
    using Block = std::array<double, TraceSummary::kSize>;
    PoolerModel p;
    p.weights = body.at("weights").get<Block>();
    p.bias = body.at("bias").get<double>();
    p.feature_mean = body.at("feature_mean").get<Block>();
    p.feature_scale = body.at("feature_scale").get<Block>();
    p.l2 = body.at("l2").get<double>();
    p.seed = body.at("seed").get<std::uint64_t>();
    p.train_size = body.at("train_size").get<std::size_t>();
    p.target_source = body.at("target_source").get<std::string>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed pooler body: ") + e.what());
  }
}

void save_pooler(const PoolerModel& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << serialize_pooler(p);
  if (!out) throw IngestionError("failed writing " + path.string());
}

PoolerModel load_pooler(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_pooler(ss.str());
}

}  // namespace cdm
