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

// Willie's tests on the input links.
//
// Willie sees the phase-1 packet count of each flow. Under H0 every count is
// Poisson(lambda T1); under H1 a slowed flow is Poisson((lambda - delta) T1).
// Equal priors put the likelihood-ratio threshold at zero.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "flowprint/stats.hpp"
#include "flowprint/traffic.hpp"

namespace flowprint {

enum class Hypothesis : std::uint8_t { kH0, kH1 };

std::string_view to_string(Hypothesis h) noexcept;

struct DetectorVerdict {
  Hypothesis decision = Hypothesis::kH0;
  double statistic = 0.0;  // log-likelihood ratio, nats
  double threshold = 0.0;
};

// ln P_{lambda-delta}(n) - ln P_lambda(n) for a Poisson count over [0, T1).
double count_log_ratio(std::uint64_t n, double lambda, double delta, double T1);

// Every flow slowed.
DetectorVerdict lrt_scenario1(std::span<const std::uint64_t> counts,
                              double lambda, double delta, double T1);

// Each flow slowed independently with probability p.
DetectorVerdict lrt_scenario2(std::span<const std::uint64_t> counts,
                              double lambda, double delta, double T1, double p);

// Per-flow rates and slow-downs (distinct-rate flows).
DetectorVerdict lrt_scenario1(std::span<const std::uint64_t> counts,
                              std::span<const double> lambdas,
                              std::span<const double> deltas, double T1);
DetectorVerdict lrt_scenario2(std::span<const std::uint64_t> counts,
                              std::span<const double> lambdas,
                              std::span<const double> deltas, double T1,
                              double p);

// max(0, 1/2 - sqrt(kl / 8)).
double pinsker_bound(double kl);

struct Phase2Check {
  bool sufficient = false;  // false: too few packets, tests skipped
  std::string note;
  stats::TestResult ks;         // inter-packet gaps vs Exponential(lambda)
  std::uint64_t count = 0;      // packets in (T1, T]
  double count_p_value = 1.0;   // two-sided vs Poisson(lambda (T - T1))
};

// Packets of `trace` at exactly T1 open the window and are not counted; gaps
// are taken between consecutive packets of [T1, T].
Phase2Check phase2_distribution_check(const PacketTrace& trace, double lambda,
                                      double T1, double T);

}  // namespace flowprint
