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

#include "cdm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cdm/error.hpp"

namespace cdm {
namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("pearson: inputs differ in length");
  if (x.size() < 2) throw ArgumentError("pearson: need at least two points");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_t_pvalue(double rho, std::size_t n) {
  if (n < 3) throw ArgumentError("spearman: need at least three points");
  if (std::abs(rho) >= 1.0) return 0.0;
  const double dof = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
  const boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double spearman_exact_pvalue(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("spearman: inputs differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw ArgumentError("spearman: need at least three points");
  if (n > kExactPermutationMaxN) throw ArgumentError("exact permutation p-value limited to n <= 10");
  // Doubled midranks are integers, so the cross-product sum is exact.
  std::vector<std::int64_t> rx, ry;
  for (double r : midranks(x)) rx.push_back(std::llround(2.0 * r));
  for (double r : midranks(y)) ry.push_back(std::llround(2.0 * r));
  // sum(rx) = sum(ry) = n(n+1), so the centered statistic is
  // n * sum(rx*ry) - n^2 (n+1)^2, scaled by n to stay integral.
  const auto ni = static_cast<std::int64_t>(n);
  const std::int64_t offset = ni * (ni + 1) * ni * (ni + 1);
  auto cross = [&](const std::vector<std::int64_t>& perm) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n; ++i) s += rx[i] * perm[i];
    return s;
  };
  std::vector<std::int64_t> perm = ry;
  std::int64_t s = cross(perm);
  const std::int64_t observed = std::abs(ni * s - offset);
  std::uint64_t extreme = 0, total = 0;
  auto visit = [&] {
    ++total;
    if (std::abs(ni * s - offset) >= observed) ++extreme;
  };
  // Heap's algorithm, iterative; each swap updates the statistic in O(1).
  visit();
  std::vector<std::size_t> c(n, 0);
  for (std::size_t i = 1; i < n;) {
    if (c[i] < i) {
      const std::size_t j = (i % 2 == 0) ? 0 : c[i];
      s += (rx[j] - rx[i]) * (perm[i] - perm[j]);
      std::swap(perm[i], perm[j]);
      visit();
      ++c[i];
      i = 1;
    } else {
      c[i] = 0;
      ++i;
    }
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("spearman: inputs differ in length");
  if (x.size() < 3) throw ArgumentError("spearman: need at least three points");
  if (is_constant(x) || is_constant(y)) {
    throw UndefinedCorrelationError("Spearman correlation undefined for a constant input");
  }
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  SpearmanResult r;
  r.n = x.size();
  r.rho = pearson(rx, ry);
  if (r.n <= kExactPermutationMaxN) {
    r.p_value = spearman_exact_pvalue(x, y);
    r.exact_p = true;
  } else {
    r.p_value = spearman_t_pvalue(r.rho, r.n);
  }
  return r;
}

std::vector<double> bonferroni(std::span<const double> pvalues, std::size_t family_size) {
  if (family_size < pvalues.size()) throw ArgumentError("Bonferroni family smaller than the number of tests");
  std::vector<double> out;
  out.reserve(pvalues.size());
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("p-values must lie in [0, 1]");
    out.push_back(std::min(1.0, p * static_cast<double>(family_size)));
  }
  return out;
}

double welch_greater_pvalue(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ArgumentError("Welch test needs two points per group");
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a, ma) / static_cast<double>(a.size());
  const double vb = sample_variance(b, mb) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) return ma > mb ? 0.0 : (ma == mb ? 0.5 : 1.0);
  const double t = (ma - mb) / std::sqrt(se2);
  const double dof = se2 * se2 /
                     (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(dof);
  return boost::math::cdf(boost::math::complement(dist, t));
}

double chi_squared_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw ArgumentError("chi-squared needs positive degrees of freedom");
  if (statistic <= 0.0) return 1.0;
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace cdm
