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

#include "flowprint/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace flowprint::stats {

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_test(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  TestResult r;
  r.n = samples.size();
  if (samples.empty()) return r;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  r.statistic = d;
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

TestResult ks_exponential(std::span<const double> samples, double rate) {
  return ks_test({samples.begin(), samples.end()}, [rate](double x) {
    return x <= 0.0 ? 0.0 : -std::expm1(-rate * x);
  });
}

TestResult ks_uniform(std::span<const double> samples, double lo,
                      double hi) {
  return ks_test({samples.begin(), samples.end()}, [lo, hi](double x) {
    return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  });
}

double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

TestResult chi2_poisson(std::span<const std::uint64_t> counts, double mean) {
  TestResult r;
  r.n = counts.size();
  if (counts.empty() || !(mean > 0.0)) return r;
  const double n = static_cast<double>(counts.size());
  boost::math::poisson_distribution<double> dist(mean);

  // Cell boundaries: cell j covers [edges[j], edges[j+1]); the last cell is
  // open to the right.
  std::vector<std::uint64_t> edges{0};
  double acc = 0.0;
  const auto kmax = static_cast<std::uint64_t>(
      mean + 12.0 * std::sqrt(mean) + 20.0);
  for (std::uint64_t k = 0; k < kmax; ++k) {
    acc += n * boost::math::pdf(dist, static_cast<double>(k));
    if (acc >= 5.0) {
      edges.push_back(k + 1);
      acc = 0.0;
    }
  }
  // Merge the right tail into the last closed cell until it is large enough.
  while (edges.size() > 1) {
    const double tail =
        n * boost::math::cdf(boost::math::complement(
                dist, static_cast<double>(edges.back()) - 1.0));
    if (tail >= 5.0) break;
    edges.pop_back();
  }
  const std::size_t cells = edges.size();
  if (cells < 2) {
    r.dof = 0;
    r.p_value = 1.0;
    return r;
  }
  std::vector<double> observed(cells, 0.0);
  for (std::uint64_t c : counts) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), c);
    observed[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
  }
  double stat = 0.0;
  for (std::size_t j = 0; j < cells; ++j) {
    const double lo = static_cast<double>(edges[j]);
    double prob;
    if (j + 1 < cells) {
      const double hi = static_cast<double>(edges[j + 1]) - 1.0;
      prob = boost::math::cdf(dist, hi) -
             (lo > 0 ? boost::math::cdf(dist, lo - 1.0) : 0.0);
    } else {
      prob = lo > 0 ? boost::math::cdf(boost::math::complement(dist, lo - 1.0))
                    : 1.0;
    }
    const double expected = n * prob;
    const double diff = observed[j] - expected;
    stat += diff * diff / expected;
  }
  r.statistic = stat;
  r.dof = cells - 1;
  r.p_value = chi2_sf(stat, static_cast<double>(r.dof));
  return r;
}

double poisson_log_pmf(std::uint64_t n, double mean) {
  const double k = static_cast<double>(n);
  if (mean == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

double poisson_two_sided_p(std::uint64_t n, double mean) {
  if (!(mean > 0.0)) return n == 0 ? 1.0 : 0.0;
  boost::math::poisson_distribution<double> dist(mean);
  const double k = static_cast<double>(n);
  const double lower = boost::math::cdf(dist, k);
  const double upper =
      n == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, k - 1.0));
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

double binomial_sigma(double p, double n) {
  if (!(n > 0.0)) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size() - 1);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (std::isinf(xs[lo]) || frac == 0.0) return xs[lo];
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

}  // namespace flowprint::stats
