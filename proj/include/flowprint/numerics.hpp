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

// Special functions and the closed-form fingerprinting planner.
//
// All logarithms are natural; capacities are in nats/second.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace flowprint {

// One M/M/1 queue of the network: service rate and the aggregate rate of the
// interfering Poisson flows sharing it.
struct QueueSpec {
  double mu = 0.0;
  double interference_rate = 0.0;

  // mu - lambda', the service rate left for the main flow.
  double effective_rate() const noexcept { return mu - interference_rate; }
  bool stable_for(double lambda) const noexcept {
    return mu > 0.0 && interference_rate >= 0.0 &&
           lambda + interference_rate <= mu;
  }
};

struct PlannerInputs {
  double T = 0.0;
  double epsilon = 0.0;
  double zeta = 0.0;
  double lambda = 0.0;
  std::vector<QueueSpec> queue_specs;
  // Replaces the capacity derived from queue_specs (distinct-rate planning).
  std::optional<double> capacity_override;

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

enum class Scenario { kAllFlows, kProbabilistic };

std::string_view to_string(Scenario s) noexcept;

// Caps applied to the closed-form counts so Monte-Carlo runs stay tractable.
// `p` replaces the fingerprint probability in the probabilistic scenario.
struct DeskScale {
  std::optional<std::uint64_t> m_cap;
  std::optional<std::uint64_t> M_cap;
  std::optional<double> p;

  bool empty() const noexcept { return !m_cap && !M_cap && !p; }
};

// Every derived parameter of one scenario instance.
//
// `log_m_exact`, `log_M_exact` and `log_p_exact` hold the closed forms before
// rounding or capping. They are logs because the probabilistic scenario
// overflows a double long before T gets interesting.
struct ScenarioPlan {
  Scenario scenario = Scenario::kAllFlows;
  double T = 0.0;
  double epsilon = 0.0;
  double zeta = 0.0;
  double lambda = 0.0;
  double C = 0.0;
  double alpha = 0.0;
  std::uint64_t m = 0;
  std::uint64_t M = 0;
  double p = 1.0;
  double T1 = 0.0;
  double T2 = 0.0;
  double delta = 0.0;
  // delta^2 T1 / lambda; shared by every flow rate under this plan.
  double slowdown_exponent = 0.0;

  double log_m_exact = 0.0;
  double log_M_exact = 0.0;
  double log_p_exact = 0.0;
  bool desk_capped = false;
};

// Principal branch W0 of the Lambert-W function for y >= 0.
double lambert_w(double y);

// erf^{-1}(x) for |x| < 1.
double inverse_erf(double x);

// C = lambda * ln(min_i(mu_i - lambda'_i) / lambda). Throws InfeasibleError if
// C <= 0 or a queue is unstable.
double capacity(double lambda, std::span<const QueueSpec> queue_specs);

// alpha = (2 erf^{-1}(1 - zeta))^2.
double reliability_alpha(double zeta);

// Solves x ln x = y for x > 0 (x = y / W(y)).
double fact1_solve(double y);

// Upper bound m p^2 (e^{delta^2 T1 / lambda} - 1) on the phase-1 relative
// entropy of the probabilistic scenario.
double poisson_kl_bound(double m, double p, double delta, double T1,
                        double lambda);

// Exact relative entropy D(Poisson(a) || Poisson(b)).
double poisson_kl(double a, double b);

// Scenario 1: every flow is fingerprinted.
ScenarioPlan plan_scenario1(const PlannerInputs& inputs,
                            const DeskScale& desk = {});

// Scenario 2: each flow is fingerprinted with probability p.
ScenarioPlan plan_scenario2(const PlannerInputs& inputs,
                            const DeskScale& desk = {});

ScenarioPlan plan(Scenario scenario, const PlannerInputs& inputs,
                  const DeskScale& desk = {});

// Scenario-1 flow count before flooring:
// 0.5 * min{(eps^2/alpha)(TC/W(TC) - 1), TC/W(TC)}.
double scenario1_flow_bound(double T, double C, double epsilon, double alpha);

// Smallest horizon (to relative precision 1e-9) at which plan_scenario1
// yields at least `target_m` flows.
double min_horizon_for_flows(const PlannerInputs& inputs,
                             std::uint64_t target_m);

// Phase-1 slow-down for a flow of rate lambda: sqrt(lambda / T1 * exponent).
double slowdown_delta(double lambda, double T1, double exponent);

// ln(1 + e^x) without overflow.
double log1p_exp(double x) noexcept;

}  // namespace flowprint
