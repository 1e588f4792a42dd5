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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "cdm/corpus.hpp"
#include "cdm/error.hpp"
#include "cdm/random.hpp"
#include "cdm/report.hpp"
#include "cdm/stats.hpp"

namespace cdm {
namespace {

// Rank of each element by counting smaller and equal elements; ties share
// the average of the positions they occupy.
std::vector<double> naive_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double naive_rho(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = naive_ranks(x), ry = naive_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> tied_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  const auto levels = rng.uniform_int(2, n + 2);
  for (auto& x : v) x = static_cast<double>(rng.uniform_int(0, levels)) * 0.5;
  if (std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; })) v[0] += 1.0;
  return v;
}

TEST(Spearman, PerfectAndReversed) {
  const std::vector<double> x = {1, 2, 3};
  EXPECT_EQ(spearman(x, std::vector<double>{10, 20, 30}).rho, 1.0);
  EXPECT_EQ(spearman(x, std::vector<double>{3, 2, 1}).rho, -1.0);
}

TEST(Spearman, MatchesNaiveOracleWithTies) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const auto n = rng.uniform_int(3, 30);
    const auto x = tied_vector(rng, n);
    const auto y = tied_vector(rng, n);
    EXPECT_NEAR(spearman(x, y).rho, naive_rho(x, y), 1e-12);
  }
}

TEST(Spearman, SymmetryNegationAndMonotoneInvariance) {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const auto n = rng.uniform_int(3, 25);
    const auto x = tied_vector(rng, n);
    const auto y = tied_vector(rng, n);
    std::vector<double> neg(n), fx(n);
    for (std::size_t i = 0; i < n; ++i) {
      neg[i] = -y[i];
      fx[i] = std::exp(x[i]) + 3.0 * x[i] * x[i] * x[i];
    }
    const double rho = spearman(x, y).rho;
    EXPECT_EQ(spearman(y, x).rho, rho);
    EXPECT_EQ(spearman(x, neg).rho, -rho);
    EXPECT_EQ(spearman(fx, y).rho, rho);
    EXPECT_EQ(spearman(x, y).p_value, spearman(fx, y).p_value);
  }
}

TEST(Spearman, ConstantInputIsAnError) {
  EXPECT_THROW(spearman(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4}), UndefinedCorrelationError);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ArgumentError);
}

// Two-sided permutation p-value by enumerating every ordering of y.
double permutation_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double observed = std::abs(naive_rho(x, y));
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  double hits = 0.0, total = 0.0;
  do {
    std::vector<double> py(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) py[i] = y[idx[i]];
    total += 1.0;
    hits += std::abs(naive_rho(x, py)) >= observed - 1e-9;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return hits / total;
}

TEST(Spearman, ExactPValueMatchesEnumeration) {
  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    const auto n = rng.uniform_int(3, 7);
    const auto x = tied_vector(rng, n);
    const auto y = tied_vector(rng, n);
    const auto r = spearman(x, y);
    EXPECT_TRUE(r.exact_p);
    EXPECT_NEAR(r.p_value, permutation_oracle(x, y), 1e-12);
  }
}

TEST(Spearman, ExactAndTApproximationAgreeAtTen) {
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(10), y(10);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    const auto r = spearman(x, y);
    ASSERT_TRUE(r.exact_p);
    worst = std::max(worst, std::abs(r.p_value - spearman_t_pvalue(r.rho, 10)));
  }
  EXPECT_LT(worst, 0.02);
}

TEST(Spearman, LargeSamplesUseTheTApproximation) {
  Rng rng(5);
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + rng.normal();
  }
  const auto r = spearman(x, y);
  EXPECT_FALSE(r.exact_p);
  const double t = r.rho * std::sqrt(38.0 / (1.0 - r.rho * r.rho));
  EXPECT_GT(t, 0.0);
  EXPECT_NEAR(r.p_value, spearman_t_pvalue(r.rho, 40), 0.0);
  EXPECT_LT(r.p_value, 0.01);
}

TEST(Bonferroni, ClampsAndScales) {
  EXPECT_EQ(bonferroni(std::vector<double>{0.01}, 4)[0], 0.04);
  EXPECT_EQ(bonferroni(std::vector<double>{0.4}, 4)[0], 1.0);
  EXPECT_EQ(bonferroni(std::vector<double>{0.37}, 1)[0], 0.37);
  EXPECT_THROW(bonferroni(std::vector<double>{0.1, 0.2, 0.3}, 2), ArgumentError);
}

AnnotatedDataset dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  AnnotatedDataset d;
  d.name = "toy";
  for (std::size_t i = 0; i < n; ++i) {
    AnnotatedRecord r;
    r.doc.id = "r" + std::to_string(i);
    r.doc.text = "w";
    r.scores["coherence"] = rng.uniform();
    r.scores["overall"] = rng.uniform();
    d.records.push_back(std::move(r));
  }
  return d;
}

TEST(EvaluateMetrics, MonotoneTransformGivesPerfectCorrelation) {
  const auto d = dataset(50, 1);
  MetricScores m;
  for (const auto& r : d.records) m["cubed"][r.doc.id] = std::pow(r.scores.at("coherence"), 3.0);
  const auto report = evaluate_metrics(d, m);
  ASSERT_EQ(report.rows.size(), 2U);
  EXPECT_EQ(report.family_size, 2U);
  EXPECT_EQ(report.rows[0].aspect, "coherence");
  EXPECT_NEAR(*report.rows[0].rho, 1.0, 1e-15);
}

TEST(EvaluateMetrics, NullMetricIsUncorrelated) {
  const auto d = dataset(500, 2);
  Rng rng(3);
  MetricScores m;
  for (const auto& r : d.records) m["noise"][r.doc.id] = rng.normal();
  const auto report = evaluate_metrics(d, m);
  for (const auto& row : report.rows) {
    EXPECT_LT(std::abs(*row.rho), 0.1);
    EXPECT_GT(*row.p_corrected, 0.05);
  }
}

TEST(EvaluateMetrics, NegatedMetricNegatesRho) {
  const auto d = dataset(80, 4);
  Rng rng(5);
  MetricScores m;
  for (const auto& r : d.records) {
    const double v = r.scores.at("overall") + 0.3 * rng.normal();
    m["plain"][r.doc.id] = v;
    m["flipped"][r.doc.id] = -v;
  }
  const auto report = evaluate_metrics(d, m);
  ASSERT_EQ(report.rows.size(), 4U);
  EXPECT_EQ(report.family_size, 4U);
  std::map<std::pair<std::string, std::string>, double> rho;
  for (const auto& row : report.rows) rho[{row.metric, row.aspect}] = *row.rho;
  EXPECT_EQ((rho[{"flipped", "overall"}]), (-rho[{"plain", "overall"}]));
  EXPECT_EQ((rho[{"flipped", "coherence"}]), (-rho[{"plain", "coherence"}]));
}

TEST(EvaluateMetrics, MissingIdsAreListed) {
  const auto d = dataset(5, 6);
  MetricScores m;
  for (std::size_t i = 0; i < 4; ++i) m["m"][d.records[i].doc.id] = 1.0 * static_cast<double>(i);
  m["m"]["stranger"] = 0.0;
  try {
    evaluate_metrics(d, m);
    FAIL();
  } catch (const ArgumentError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("r4"), std::string::npos);
    EXPECT_NE(what.find("stranger"), std::string::npos);
  }
}

TEST(EvaluateMetrics, UndefinedRowsAreReportedNotNan) {
  const auto d = dataset(20, 7);
  MetricScores m;
  for (const auto& r : d.records) m["flat"][r.doc.id] = 0.5;
  const auto report = evaluate_metrics(d, m);
  EXPECT_FALSE(report.all_defined());
  for (const auto& row : report.rows) {
    EXPECT_FALSE(row.rho.has_value());
    EXPECT_FALSE(row.error.empty());
  }
  EXPECT_EQ(report.to_json().find("nan"), std::string::npos);
  EXPECT_NE(report.to_json().find("null"), std::string::npos);
}

TEST(EvaluateMetrics, ReportsAreDeterministic) {
  const auto d = dataset(30, 8);
  MetricScores m;
  for (const auto& r : d.records) m["m"][r.doc.id] = r.scores.at("overall") * 2.0;
  const auto a = evaluate_metrics(d, m);
  const auto b = evaluate_metrics(d, m);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.to_text(), b.to_text());
  EXPECT_NE(a.to_text().find("family size: 2"), std::string::npos);
}

TEST(AnnotatedDatasetFile, ParsesAndValidates) {
  const auto path = std::filesystem::temp_directory_path() / ("cdm_ann_" + std::to_string(::getpid()) + ".jsonl");
  {
    std::ofstream out(path);
    out << R"({"id": "a", "text": "x y", "scores": {"overall": 0.5}})" << '\n';
    out << R"({"id": "b", "turns": ["x", "y z"], "scores": {"overall": 1.0, "coherence": 0.0}})" << '\n';
  }
  const auto d = read_annotated_dataset(path);
  ASSERT_EQ(d.records.size(), 2U);
  EXPECT_EQ(d.records[1].doc.turns.size(), 2U);
  EXPECT_EQ(d.records[1].scores.at("coherence"), 0.0);
  {
    std::ofstream out(path);
    out << R"({"id": "a", "text": "x", "scores": {"overall": 1.5}})" << '\n';
  }
  EXPECT_THROW(read_annotated_dataset(path), Error);
  {
    std::ofstream out(path);
    out << R"({"id": "a", "text": "x", "scores": {"overall": 0.5}})" << '\n';
    out << R"({"id": "a", "text": "y", "scores": {"overall": 0.5}})" << '\n';
  }
  EXPECT_THROW(read_annotated_dataset(path), Error);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace cdm
