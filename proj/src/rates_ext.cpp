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

#include "flowprint/rates_ext.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "flowprint/errors.hpp"

namespace flowprint {

bool all_equal(std::span<const double> lambdas) noexcept {
  return std::adjacent_find(lambdas.begin(), lambdas.end(),
                            std::not_equal_to<>()) == lambdas.end();
}

std::vector<double> per_flow_capacity(std::span<const double> lambdas,
                                      std::span<const QueueSpec> specs) {
  if (lambdas.empty() || lambdas.size() != specs.size()) {
    throw ConfigError("lambdas", "need one rate per queue");
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) {
      throw ConfigError("lambdas", "rate " + std::to_string(i) +
                                       " must be positive");
    }
  }
  const double lambda_min = *std::min_element(lambdas.begin(), lambdas.end());
  std::vector<double> c(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!specs[i].stable_for(lambdas[i]) ||
        !(lambdas[i] < specs[i].effective_rate())) {
      throw InfeasibleError("infeasible scenario: flow " + std::to_string(i) +
                            " has lambda_i >= mu_i - lambda'_i");
    }
    c[i] = lambda_min * std::log(specs[i].effective_rate() / lambdas[i]);
  }
  return c;
}

double capacity_prime(std::span<const double> lambdas,
                      std::span<const QueueSpec> specs) {
  if (all_equal(lambdas) && !lambdas.empty()) {
    // Same expression as the equal-rate capacity, so the degenerate case is
    // bit-identical to it.
    return capacity(lambdas.front(), specs);
  }
  const auto c = per_flow_capacity(lambdas, specs);
  return *std::min_element(c.begin(), c.end());
}

DistinctRatePlan plan_distinct_rates(std::span<const double> lambdas,
                                     const PlannerInputs& base,
                                     Scenario scenario,
                                     const DeskScale& desk) {
  if (lambdas.size() != base.queue_specs.size()) {
    throw ConfigError("lambdas", "need one rate per queue");
  }
  DistinctRatePlan out;
  out.rates.lambdas.assign(lambdas.begin(), lambdas.end());
  out.rates.C_prime = capacity_prime(lambdas, base.queue_specs);
  out.rates.lambda_min = *std::min_element(lambdas.begin(), lambdas.end());

  PlannerInputs in = base;
  in.lambda = out.rates.lambda_min;
  in.capacity_override = out.rates.C_prime;
  DeskScale d = desk;
  // The flow count is the number of queues.
  if (!d.m_cap || *d.m_cap > lambdas.size()) d.m_cap = lambdas.size();
  out.plan = plan(scenario, in, d);
  if (out.plan.m != lambdas.size()) {
    throw InfeasibleError("infeasible scenario: the horizon supports only " +
                          std::to_string(out.plan.m) + " of " +
                          std::to_string(lambdas.size()) + " flows");
  }

  out.rates.deltas.resize(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double d_i = slowdown_delta(lambdas[i], out.plan.T1,
                                      out.plan.slowdown_exponent);
    if (!(d_i < lambdas[i])) {
      throw InfeasibleError("infeasible scenario: slow-down of flow " +
                            std::to_string(i) + " reaches its rate");
    }
    out.rates.deltas[i] = d_i;
  }
  return out;
}

}  // namespace flowprint
