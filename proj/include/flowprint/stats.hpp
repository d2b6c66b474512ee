// Copyright 2026 The flowprint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Goodness-of-fit tests and small distribution helpers shared by the detector
// and the test suites.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace flowprint::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t dof = 0;  // chi-square only
};

// Survival function of the Kolmogorov distribution.
double kolmogorov_sf(double x);

// One-sample Kolmogorov-Smirnov test against a continuous CDF. The p-value
// uses the asymptotic distribution with Stephens' finite-n correction.
TestResult ks_test(std::vector<double> samples,
                   const std::function<double(double)>& cdf);
TestResult ks_exponential(std::span<const double> samples, double rate);
TestResult ks_uniform(std::span<const double> samples, double lo, double hi);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, double dof);

// Chi-square goodness of fit of observed counts against Poisson(mean). Cells
// are pooled from both tails until each has expected frequency >= 5.
TestResult chi2_poisson(std::span<const std::uint64_t> counts, double mean);

double poisson_log_pmf(std::uint64_t n, double mean);

// Two-sided exact tail p-value, min(1, 2 min(P[X <= n], P[X >= n])).
double poisson_two_sided_p(std::uint64_t n, double mean);

// sqrt(p (1 - p) / n).
double binomial_sigma(double p, double n);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);

// Sample quantile with linear interpolation (type 7).
double quantile(std::vector<double> xs, double q);

}  // namespace flowprint::stats
