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

#include "cdm/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "cdm/error.hpp"
#include "cdm/stats.hpp"
#include "json.hpp"

namespace cdm {
namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 10;
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kShown) out += fmt::format(", ... ({} total)", ids.size());
  return out;
}

}  // namespace

bool CorrelationReport::all_defined() const {
  return std::all_of(rows.begin(), rows.end(), [](const CorrelationRow& r) { return r.rho.has_value(); });
}

std::string CorrelationReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["dataset"] = dataset;
  doc["family_size"] = family_size;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["metric"] = r.metric;
    row["aspect"] = r.aspect;
    row["n"] = r.n;
    row["rho"] = r.rho ? nlohmann::ordered_json(*r.rho) : nlohmann::ordered_json(nullptr);
    row["p_value"] = r.p_value ? nlohmann::ordered_json(*r.p_value) : nlohmann::ordered_json(nullptr);
    row["p_corrected"] = r.p_corrected ? nlohmann::ordered_json(*r.p_corrected) : nlohmann::ordered_json(nullptr);
    if (!r.error.empty()) row["error"] = r.error;
    arr.push_back(std::move(row));
  }
  doc["rows"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::string CorrelationReport::to_text() const {
  std::size_t wm = 6, wa = 6;
  for (const auto& r : rows) {
    wm = std::max(wm, r.metric.size());
    wa = std::max(wa, r.aspect.size());
  }
  std::string out = fmt::format("dataset: {}\nBonferroni family size: {}\n", dataset, family_size);
  out += fmt::format("{:<{}}  {:<{}}  {:>6}  {:>8}  {:>10}  {:>10}\n", "metric", wm, "aspect", wa, "n", "rho",
                     "p", "p_corr");
  for (const auto& r : rows) {
    if (r.rho) {
      out += fmt::format("{:<{}}  {:<{}}  {:>6}  {:>8.4f}  {:>10.3e}  {:>10.3e}\n", r.metric, wm, r.aspect, wa, r.n,
                         *r.rho, *r.p_value, *r.p_corrected);
    } else {
      out += fmt::format("{:<{}}  {:<{}}  {:>6}  {:>8}  {:>10}  {:>10}  {}\n", r.metric, wm, r.aspect, wa, r.n,
                         "undef", "-", "-", r.error);
    }
  }
  return out;
}

CorrelationReport evaluate_metrics(const AnnotatedDataset& dataset, const MetricScores& metrics) {
  dataset.validate();
  std::set<std::string> ids;
  std::set<std::string> aspects;
  for (const auto& rec : dataset.records) {
    ids.insert(rec.doc.id);
    for (const auto& [aspect, v] : rec.scores) aspects.insert(aspect);
  }
  for (const auto& [metric, scores] : metrics) {
    std::vector<std::string> missing, extra;
    for (const auto& id : ids) {
      if (scores.count(id) == 0U) missing.push_back(id);
    }
    for (const auto& [id, v] : scores) {
      if (ids.count(id) == 0U) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
      std::string msg = "metric '" + metric + "' does not match dataset '" + dataset.name + "'";
      if (!missing.empty()) msg += "; missing ids: " + join_ids(missing);
      if (!extra.empty()) msg += "; unknown ids: " + join_ids(extra);
      throw ArgumentError(msg);
    }
  }

  CorrelationReport report;
  report.dataset = dataset.name;
  for (const auto& [metric, scores] : metrics) {
    for (const auto& aspect : aspects) {
      std::vector<double> human, machine;
      for (const auto& rec : dataset.records) {
        auto it = rec.scores.find(aspect);
        if (it == rec.scores.end()) continue;
        human.push_back(it->second);
        machine.push_back(scores.at(rec.doc.id));
      }
      CorrelationRow row;
      row.metric = metric;
      row.aspect = aspect;
      row.n = human.size();
      try {
        const auto r = spearman(machine, human);
        row.rho = r.rho;
        row.p_value = r.p_value;
      } catch (const UndefinedCorrelationError& e) {
        row.error = e.what();
      } catch (const ArgumentError& e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }
  report.family_size = report.rows.size();
  for (auto& row : report.rows) {
    if (row.p_value) {
      const double p = *row.p_value;
      row.p_corrected = bonferroni(std::span<const double>(&p, 1), report.family_size).front();
    }
  }
  return report;
}

}  // namespace cdm
