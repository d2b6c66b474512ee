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

#include "flowprint/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "flowprint/errors.hpp"

namespace flowprint {
namespace {

constexpr double kMaxExactCount = 9007199254740992.0;  // 2^53

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Splits T into (T1, T2) with T1 + T2 == T in floating point. The larger part
// is computed from the closed form and the smaller one by subtraction, which
// is exact (Sterbenz) because the larger part lies in [T/2, T].
void split_horizon(double T, double t1_closed, double t2_closed,
                   ScenarioPlan& out) {
  if (t1_closed >= t2_closed) {
    out.T1 = t1_closed;
    out.T2 = T - out.T1;
  } else {
    out.T2 = t2_closed;
    out.T1 = T - out.T2;
  }
}

std::uint64_t round_count(double log_exact, std::optional<std::uint64_t> cap,
                          const char* name) {
  if (cap) {
    if (log_exact >= std::log(static_cast<double>(*cap))) return *cap;
    return static_cast<std::uint64_t>(std::floor(std::exp(log_exact)));
  }
  if (log_exact >= std::log(kMaxExactCount)) {
    throw InfeasibleError(std::string(name) + " = e^" +
                          fmt_double(log_exact) +
                          " is not representable; desk-scale override "
                          "required");
  }
  return static_cast<std::uint64_t>(std::floor(std::exp(log_exact)));
}

}  // namespace

std::string_view to_string(Scenario s) noexcept {
  return s == Scenario::kAllFlows ? "all_flows" : "probabilistic";
}

void PlannerInputs::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw ConfigError("T", "time horizon must be positive");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon", "invisibility slack must be positive");
  }
  if (!(zeta > 0.0) || zeta > 1.0) {
    throw ConfigError("zeta", "reliability slack must lie in (0, 1]");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda", "flow rate must be positive");
  }
  if (queue_specs.empty()) {
    throw ConfigError("mu", "at least one queue is required");
  }
  for (std::size_t i = 0; i < queue_specs.size(); ++i) {
    const QueueSpec& q = queue_specs[i];
    if (!(q.mu > 0.0)) {
      throw ConfigError("mu", "service rate of queue " + std::to_string(i) +
                                  " must be positive");
    }
    if (!(q.interference_rate >= 0.0)) {
      throw ConfigError("lambda_prime", "interference rate of queue " +
                                            std::to_string(i) +
                                            " must be nonnegative");
    }
    if (!q.stable_for(lambda)) {
      throw ConfigError("mu", "queue " + std::to_string(i) +
                                  " is unstable: lambda + lambda' > mu");
    }
  }
}

double log1p_exp(double x) noexcept {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double lambert_w(double y) {
  if (!(y >= 0.0)) {
    throw std::domain_error("lambert_w: argument must be nonnegative");
  }
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return y;

  if (y > std::numbers::e) {
    // Newton on w + ln w = ln y; stays finite for any representable y.
    const double ly = std::log(y);
    const double lly = std::log(ly);
    double w = ly - lly + lly / ly;
    for (int it = 0; it < 50; ++it) {
      const double g = w + std::log(w) - ly;
      const double step = g * w / (w + 1.0);
      w -= step;
      if (std::abs(step) <= 1e-16 * w) break;
    }
    return w;
  }

  double w;
  if (y < 0.25) {
    w = y * (1.0 - y * (1.0 - y * (1.5 - y * (8.0 / 3.0))));
  } else {
    const double l = std::log1p(y);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  // Halley on w e^w - y.
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - y;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-17 + 1e-16 * std::abs(w)) break;
  }
  return w;
}

double inverse_erf(double x) {
  if (!(std::abs(x) < 1.0)) {
    throw std::domain_error("inverse_erf: argument must satisfy |x| < 1");
  }
  if (x == 0.0) return 0.0;

  // Giles' single-precision approximation as the starting point.
  double r;
  double w = -std::log((1.0 - x) * (1.0 + x));
  if (w < 6.25) {
    w -= 3.125;
    double p = -3.6444120640178196996e-21;
    p = -1.685059138182016589e-19 + p * w;
    p = 1.2858480715256400167e-18 + p * w;
    p = 1.115787767802518096e-17 + p * w;
    p = -1.333171662854620906e-16 + p * w;
    p = 2.0972767875968561637e-17 + p * w;
    p = 6.6376381343583238325e-15 + p * w;
    p = -4.0545662729752068639e-14 + p * w;
    p = -8.1519341976054721522e-14 + p * w;
    p = 2.6335093153082322977e-12 + p * w;
    p = -1.2975133253453532498e-11 + p * w;
    p = -5.4154120542946279317e-11 + p * w;
    p = 1.051212273321532285e-09 + p * w;
    p = -4.1126339803469836976e-09 + p * w;
    p = -2.9070369957882005086e-08 + p * w;
    p = 4.2347877827932403518e-07 + p * w;
    p = -1.3654692000834678645e-06 + p * w;
    p = -1.3882523362786468719e-05 + p * w;
    p = 0.0001867342080340571352 + p * w;
    p = -0.00074070253416626697512 + p * w;
    p = -0.0060336708714301490533 + p * w;
    p = 0.24015818242558961693 + p * w;
    p = 1.6536545626831027356 + p * w;
    r = p * x;
  } else {
    w = std::sqrt(w) - 3.0;
    double p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
    r = p * x;
  }

  // Halley refinement. For |x| > 1/2 the residual is taken through erfc so it
  // keeps full relative precision in the tail (1 - |x| is exact there).
  const double ax = std::abs(x);
  const double sgn = x < 0.0 ? -1.0 : 1.0;
  double z = std::abs(r);
  for (int it = 0; it < 8; ++it) {
    const double f =
        ax > 0.5 ? (1.0 - ax) - std::erfc(z) : std::erf(z) - ax;
    const double fp = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-z * z);
    const double step = f / (fp + z * f);
    z -= step;
    if (std::abs(step) <= 1e-17 * (1.0 + z)) break;
  }
  return sgn * z;
}

double capacity(double lambda, std::span<const QueueSpec> queue_specs) {
  if (!(lambda > 0.0)) throw InfeasibleError("capacity: lambda must be > 0");
  if (queue_specs.empty()) {
    throw InfeasibleError("capacity: no queues given");
  }
  double min_eff = std::numeric_limits<double>::infinity();
  for (const QueueSpec& q : queue_specs) {
    if (!q.stable_for(lambda)) {
      throw InfeasibleError("capacity: unstable queue (lambda + lambda' > mu)");
    }
    min_eff = std::min(min_eff, q.effective_rate());
  }
  const double c = lambda * std::log(min_eff / lambda);
  if (!(c > 0.0)) {
    throw InfeasibleError("infeasible scenario: capacity " + fmt_double(c) +
                          " nats/s is not positive (need lambda < min(mu - "
                          "lambda'))");
  }
  return c;
}

double reliability_alpha(double zeta) {
  if (!(zeta > 0.0) || zeta > 1.0) {
    throw std::domain_error("reliability_alpha: zeta must lie in (0, 1]");
  }
  const double r = 2.0 * inverse_erf(1.0 - zeta);
  return r * r;
}

double fact1_solve(double y) {
  if (!(y > 0.0)) throw std::domain_error("fact1_solve: y must be positive");
  return y / lambert_w(y);
}

double poisson_kl_bound(double m, double p, double delta, double T1,
                        double lambda) {
  return m * p * p * std::expm1(delta * delta * T1 / lambda);
}

double poisson_kl(double a, double b) {
  if (a == 0.0) return b;
  return a * std::log(a / b) - a + b;
}

namespace {

double planning_capacity(const PlannerInputs& inputs) {
  if (!inputs.capacity_override) {
    return capacity(inputs.lambda, inputs.queue_specs);
  }
  const double c = *inputs.capacity_override;
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InfeasibleError("infeasible scenario: capacity " + fmt_double(c) +
                          " nats/s is not positive");
  }
  return c;
}

}  // namespace

double slowdown_delta(double lambda, double T1, double exponent) {
  return std::sqrt(lambda / T1 * exponent);
}

double scenario1_flow_bound(double T, double C, double epsilon,
                            double alpha) {
  const double tc = T * C;
  const double x = tc / lambert_w(tc);
  return 0.5 * std::min(epsilon * epsilon / alpha * (x - 1.0), x);
}

ScenarioPlan plan_scenario1(const PlannerInputs& inputs,
                            const DeskScale& desk) {
  inputs.validate();
  ScenarioPlan plan;
  plan.scenario = Scenario::kAllFlows;
  plan.T = inputs.T;
  plan.epsilon = inputs.epsilon;
  plan.zeta = inputs.zeta;
  plan.lambda = inputs.lambda;
  plan.C = planning_capacity(inputs);
  plan.alpha = reliability_alpha(inputs.zeta);
  if (plan.alpha == 0.0) {
    throw InfeasibleError(
        "infeasible scenario: zeta = 1 gives alpha = 0, so T1 = 0 and the "
        "slow-down is undefined");
  }

  const double eps2 = inputs.epsilon * inputs.epsilon;
  const double m_real =
      scenario1_flow_bound(inputs.T, plan.C, inputs.epsilon, plan.alpha);
  plan.log_m_exact = m_real > 0.0 ? std::log(m_real)
                                  : -std::numeric_limits<double>::infinity();
  plan.log_p_exact = 0.0;
  plan.p = 1.0;

  std::uint64_t m = m_real >= 1.0 ? static_cast<std::uint64_t>(m_real) : 0;
  if (desk.m_cap && *desk.m_cap < m) {
    m = *desk.m_cap;
    plan.desk_capped = true;
  }
  if (m < 1) {
    throw InfeasibleError("infeasible scenario: planned flow count " +
                          fmt_double(m_real) + " < 1 (T too small)");
  }
  plan.m = m;
  plan.M = m;
  plan.log_M_exact = plan.log_m_exact;

  const double ratio = static_cast<double>(m) * plan.alpha / eps2;
  split_horizon(inputs.T, inputs.T * ratio / (1.0 + ratio),
                inputs.T / (1.0 + ratio), plan);
  if (!(plan.T1 > 0.0) || !(plan.T2 > 0.0)) {
    throw InfeasibleError("infeasible scenario: degenerate phase split");
  }
  plan.slowdown_exponent = 2.0 * eps2 / static_cast<double>(m);
  plan.delta = slowdown_delta(inputs.lambda, plan.T1, plan.slowdown_exponent);
  if (!(plan.delta < inputs.lambda)) {
    throw InfeasibleError("infeasible scenario: slow-down " +
                          fmt_double(plan.delta) + " >= lambda");
  }
  // Decodability of the whole codebook within phase 2.
  if (!(std::log(static_cast<double>(m)) < plan.C * plan.T2)) {
    throw InfeasibleError("planner invariant violated: ln m >= C T2");
  }
  return plan;
}

ScenarioPlan plan_scenario2(const PlannerInputs& inputs,
                            const DeskScale& desk) {
  inputs.validate();
  ScenarioPlan plan;
  plan.scenario = Scenario::kProbabilistic;
  plan.T = inputs.T;
  plan.epsilon = inputs.epsilon;
  plan.zeta = inputs.zeta;
  plan.lambda = inputs.lambda;
  plan.C = planning_capacity(inputs);
  plan.alpha = reliability_alpha(inputs.zeta);
  if (plan.alpha == 0.0) {
    throw InfeasibleError(
        "infeasible scenario: zeta = 1 gives alpha = 0, so T1 = 0 and the "
        "slow-down is undefined");
  }

  const double eps2 = inputs.epsilon * inputs.epsilon;
  const double ct = plan.C * inputs.T;
  const double root = std::sqrt(ct * plan.alpha);
  plan.log_m_exact = 2.0 * ct - root - std::log(2.0 * eps2);
  plan.log_p_exact = std::log(eps2) - ct;
  plan.log_M_exact =
      -std::numbers::ln2 + ct / (1.0 + plan.alpha / log1p_exp(root));

  plan.m = round_count(plan.log_m_exact, desk.m_cap, "m");
  plan.M = round_count(plan.log_M_exact, desk.M_cap, "M");
  plan.desk_capped =
      (desk.m_cap && plan.log_m_exact > std::log(double(*desk.m_cap))) ||
      (desk.M_cap && plan.log_M_exact > std::log(double(*desk.M_cap))) ||
      desk.p.has_value();
  if (desk.p) {
    if (!(*desk.p > 0.0) || *desk.p > 1.0) {
      throw ConfigError("p", "fingerprint probability must lie in (0, 1]");
    }
    plan.p = *desk.p;
  } else {
    plan.p = std::exp(plan.log_p_exact);
  }
  if (plan.m < 1) {
    throw InfeasibleError("infeasible scenario: planned flow count < 1");
  }
  if (plan.M < 1) {
    throw InfeasibleError("infeasible scenario: planned codebook size < 1");
  }
  if (!(plan.p > 0.0)) {
    throw InfeasibleError(
        "infeasible scenario: fingerprint probability underflows; "
        "desk-scale override required");
  }
  if (static_cast<double>(plan.M) < static_cast<double>(plan.m) * plan.p) {
    throw InfeasibleError(
        "infeasible scenario: codebook smaller than the expected number of "
        "fingerprinted flows (M < m p)");
  }

  // ln(1 + eps^2 / (2 m p^2)) with the rounded / capped m and p.
  const double log_ratio = std::log(eps2) - std::numbers::ln2 -
                           std::log(static_cast<double>(plan.m)) -
                           2.0 * std::log(plan.p);
  const double L = log1p_exp(log_ratio);
  split_horizon(inputs.T, inputs.T * plan.alpha / (L + plan.alpha),
                inputs.T * L / (L + plan.alpha), plan);
  if (!(plan.T1 > 0.0) || !(plan.T2 > 0.0)) {
    throw InfeasibleError("infeasible scenario: degenerate phase split");
  }
  plan.slowdown_exponent = L;
  plan.delta = slowdown_delta(inputs.lambda, plan.T1, L);
  if (!(plan.delta < inputs.lambda)) {
    throw InfeasibleError("infeasible scenario: slow-down " +
                          fmt_double(plan.delta) + " >= lambda");
  }
  return plan;
}

ScenarioPlan plan(Scenario scenario, const PlannerInputs& inputs,
                  const DeskScale& desk) {
  return scenario == Scenario::kAllFlows ? plan_scenario1(inputs, desk)
                                         : plan_scenario2(inputs, desk);
}

double min_horizon_for_flows(const PlannerInputs& inputs,
                             std::uint64_t target_m) {
  PlannerInputs probe = inputs;
  probe.T = 1.0;
  probe.validate();
  const double c = planning_capacity(inputs);
  const double alpha = reliability_alpha(inputs.zeta);
  if (alpha == 0.0) {
    throw InfeasibleError("infeasible scenario: zeta = 1 gives alpha = 0");
  }
  const double target = static_cast<double>(target_m);
  auto enough = [&](double t) {
    return scenario1_flow_bound(t, c, inputs.epsilon, alpha) >= target;
  };
  double lo = 1e-9;
  double hi = 1.0;
  while (!enough(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw InfeasibleError("no horizon reaches target m");
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (enough(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace flowprint
