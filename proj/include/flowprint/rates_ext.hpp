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

// Flows with distinct rates.
//
// The codebook is drawn once at the slowest rate lambda_min. Flow i plays the
// codeword compressed by lambda_min / lambda_i, so its fingerprint occupies
// T2 * lambda_min / lambda_i of phase 2, and Bob stretches it back before
// decoding. The capacity becomes
//   C' = min_i lambda_min * ln((mu_i - lambda'_i) / lambda_i),
// which is C when all rates agree.

#pragma once

#include <span>
#include <vector>

#include "flowprint/numerics.hpp"

namespace flowprint {

struct RatePlan {
  std::vector<double> lambdas;
  double lambda_min = 0.0;
  std::vector<double> deltas;
  double C_prime = 0.0;
};

struct DistinctRatePlan {
  RatePlan rates;
  ScenarioPlan plan;  // planned at lambda_min with C replaced by C'
};

// Per-flow bound lambda_min * ln((mu_i - lambda'_i) / lambda_i).
std::vector<double> per_flow_capacity(std::span<const double> lambdas,
                                      std::span<const QueueSpec> specs);

// Throws InfeasibleError if some lambda_i >= mu_i - lambda'_i.
double capacity_prime(std::span<const double> lambdas,
                      std::span<const QueueSpec> specs);

// `base` supplies T, epsilon, zeta and the queues; its lambda is ignored.
DistinctRatePlan plan_distinct_rates(std::span<const double> lambdas,
                                     const PlannerInputs& base,
                                     Scenario scenario,
                                     const DeskScale& desk = {});

bool all_equal(std::span<const double> lambdas) noexcept;

}  // namespace flowprint
