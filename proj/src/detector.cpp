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

#include "flowprint/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace flowprint {
namespace {

void check_rates(double lambda, double delta, double T1) {
  if (!(lambda > 0.0) || !(delta >= 0.0) || !(delta < lambda) ||
      !(T1 >= 0.0)) {
    throw std::invalid_argument(
        "detector: need lambda > 0, 0 <= delta < lambda, T1 >= 0");
  }
}

double log_add_exp(double a, double b) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

DetectorVerdict decide(double statistic) {
  DetectorVerdict v;
  v.statistic = statistic;
  v.decision = statistic > v.threshold ? Hypothesis::kH1 : Hypothesis::kH0;
  return v;
}

}  // namespace

std::string_view to_string(Hypothesis h) noexcept {
  return h == Hypothesis::kH0 ? "H0" : "H1";
}

// The log-gamma terms of the two Poisson masses cancel.
double count_log_ratio(std::uint64_t n, double lambda, double delta,
                       double T1) {
  if (delta == 0.0) return 0.0;
  return static_cast<double>(n) * std::log1p(-delta / lambda) + delta * T1;
}

DetectorVerdict lrt_scenario1(std::span<const std::uint64_t> counts,
                              double lambda, double delta, double T1) {
  const std::vector<double> l(counts.size(), lambda), d(counts.size(), delta);
  return lrt_scenario1(counts, l, d, T1);
}

DetectorVerdict lrt_scenario2(std::span<const std::uint64_t> counts,
                              double lambda, double delta, double T1,
                              double p) {
  const std::vector<double> l(counts.size(), lambda), d(counts.size(), delta);
  return lrt_scenario2(counts, l, d, T1, p);
}

DetectorVerdict lrt_scenario1(std::span<const std::uint64_t> counts,
                              std::span<const double> lambdas,
                              std::span<const double> deltas, double T1) {
  if (lambdas.size() != counts.size() || deltas.size() != counts.size()) {
    throw std::invalid_argument("lrt_scenario1: one rate per count");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    check_rates(lambdas[i], deltas[i], T1);
    s += count_log_ratio(counts[i], lambdas[i], deltas[i], T1);
  }
  return decide(s);
}

DetectorVerdict lrt_scenario2(std::span<const std::uint64_t> counts,
                              std::span<const double> lambdas,
                              std::span<const double> deltas, double T1,
                              double p) {
  if (lambdas.size() != counts.size() || deltas.size() != counts.size()) {
    throw std::invalid_argument("lrt_scenario2: one rate per count");
  }
  if (!(p >= 0.0) || p > 1.0) {
    throw std::invalid_argument("lrt_scenario2: p must lie in [0, 1]");
  }
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    check_rates(lambdas[i], deltas[i], T1);
    s += log_add_exp(
        log_p + count_log_ratio(counts[i], lambdas[i], deltas[i], T1), log_q);
  }
  return decide(s);
}

double pinsker_bound(double kl) {
  if (!(kl >= 0.0)) throw std::domain_error("pinsker_bound: kl must be >= 0");
  return std::max(0.0, 0.5 - std::sqrt(kl / 8.0));
}

Phase2Check phase2_distribution_check(const PacketTrace& trace, double lambda,
                                      double T1, double T) {
  if (!(lambda > 0.0) || !(T > T1)) {
    throw std::invalid_argument(
        "phase2_distribution_check: need lambda > 0 and T > T1");
  }
  Phase2Check r;
  const auto win = trace.window(T1, std::nextafter(T, T + 1.0));
  r.count = static_cast<std::uint64_t>(
      std::count_if(win.begin(), win.end(), [T1](double t) { return t > T1; }));
  if (win.size() < 3) {
    r.note = "insufficient data: fewer than 3 packets in phase 2";
    return r;
  }
  std::vector<double> gaps(win.size() - 1);
  for (std::size_t k = 1; k < win.size(); ++k) gaps[k - 1] = win[k] - win[k - 1];
  r.sufficient = true;
  r.ks = stats::ks_exponential(gaps, lambda);
  r.count_p_value = stats::poisson_two_sided_p(r.count, lambda * (T - T1));
  r.note = "ok";
  return r;
}

}  // namespace flowprint
