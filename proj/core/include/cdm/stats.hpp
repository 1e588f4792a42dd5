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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cdm {

// Average ranks (1-based), ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
  bool exact_p = false;
};

// Largest n for which the p-value enumerates all n! permutations.
inline constexpr std::size_t kExactPermutationMaxN = 10;

// Pearson correlation of midranks. The p-value is exact by permutation for
// n <= 10 and uses t = rho * sqrt((n - 2) / (1 - rho^2)) with n - 2 degrees
// of freedom otherwise. Throws ArgumentError for unequal lengths or n < 3
// and UndefinedCorrelationError when either input is constant.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

// Two-sided p-value of a correlation via the t approximation.
double spearman_t_pvalue(double rho, std::size_t n);
// Two-sided exact permutation p-value of the rank correlation.
double spearman_exact_pvalue(std::span<const double> x, std::span<const double> y);

// min(1, p * family_size) per entry. Throws ArgumentError when the family
// is smaller than the list.
std::vector<double> bonferroni(std::span<const double> pvalues, std::size_t family_size);

// One-sided Welch test that mean(a) > mean(b); returns the p-value.
double welch_greater_pvalue(std::span<const double> a, std::span<const double> b);

// Upper-tail chi-squared probability.
double chi_squared_sf(double statistic, double dof);

}  // namespace cdm
