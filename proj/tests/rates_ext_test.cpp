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


#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "flowprint/codebook.hpp"
#include "flowprint/decoder.hpp"
#include "flowprint/embedder.hpp"
#include "flowprint/errors.hpp"
#include "flowprint/harness.hpp"
#include "flowprint/queuenet.hpp"
#include "flowprint/rates_ext.hpp"
#include "flowprint/rng.hpp"

namespace flowprint {
namespace {

PlannerInputs base(double T, std::vector<QueueSpec> specs) {
  PlannerInputs in;
  in.T = T;
  in.epsilon = 0.2;
  in.zeta = 0.1;
  in.lambda = 1.0;
  in.queue_specs = std::move(specs);
  return in;
}

TEST(CapacityPrime, WeightedPerFlowBounds) {
  // lambda = {1, 2}, mu - lambda' = {e, 2e}: both bounds are 1.
  const std::vector<double> lam = {1.0, 2.0};
  const std::vector<QueueSpec> specs = {{std::numbers::e, 0.0},
                                        {2 * std::numbers::e, 0.0}};
  const auto c = per_flow_capacity(lam, specs);
  EXPECT_NEAR(c[0], 1.0, 1e-15);
  EXPECT_NEAR(c[1], 1.0, 1e-15);
  EXPECT_NEAR(capacity_prime(lam, specs), 1.0, 1e-15);
}

TEST(CapacityPrime, EqualRatesCollapseBitExactly) {
  const std::vector<double> lam(3, 1.5);
  const std::vector<QueueSpec> specs = {{6.0, 1.0}, {5.0, 0.5}, {7.0, 2.0}};
  EXPECT_EQ(capacity_prime(lam, specs), capacity(1.5, specs));
}

TEST(CapacityPrime, OverloadedFlowInfeasible) {
  const std::vector<double> lam = {1.0, 4.0};
  const std::vector<QueueSpec> specs = {{5.0, 1.0}, {5.0, 1.0}};
  EXPECT_THROW(capacity_prime(lam, specs), InfeasibleError);
  EXPECT_THROW(per_flow_capacity(std::vector<double>{1.0}, specs), ConfigError);
}

TEST(DistinctPlan, PerFlowSlowdowns) {
  const std::vector<double> lam = {1.0, 1.5, 2.0};
  const std::vector<QueueSpec> specs = {{5.0, 1.0}, {6.0, 1.0}, {9.0, 1.0}};
  const DistinctRatePlan s1 =
      plan_distinct_rates(lam, base(8000.0, specs), Scenario::kAllFlows);
  ASSERT_EQ(s1.plan.m, 3u);
  EXPECT_EQ(s1.rates.lambda_min, 1.0);
  EXPECT_EQ(s1.plan.lambda, 1.0);
  EXPECT_EQ(s1.plan.C, s1.rates.C_prime);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(s1.rates.deltas[i],
                0.2 * std::sqrt(2 * lam[i] / (3 * s1.plan.T1)), 1e-15);
    EXPECT_LT(s1.rates.deltas[i], lam[i]);
  }

  const DistinctRatePlan s2 = plan_distinct_rates(
      lam, base(1000.0, specs), Scenario::kProbabilistic,
      DeskScale{.M_cap = 16, .p = 0.5});
  const double L = std::log1p(0.04 / (2 * 3 * 0.25));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(s2.rates.deltas[i], std::sqrt(lam[i] / s2.plan.T1 * L), 1e-15);
  }
}

TEST(DistinctPlan, EqualRatesMatchBasePlan) {
  const std::vector<QueueSpec> specs(4, QueueSpec{5.0, 1.0});
  const std::vector<double> lam(4, 1.0);
  const DistinctRatePlan d =
      plan_distinct_rates(lam, base(8000.0, specs), Scenario::kAllFlows);
  const ScenarioPlan p =
      plan_scenario1(base(8000.0, specs), DeskScale{.m_cap = 4});
  EXPECT_EQ(d.plan.m, p.m);
  EXPECT_EQ(d.plan.T1, p.T1);
  EXPECT_EQ(d.plan.T2, p.T2);
  EXPECT_EQ(d.plan.delta, p.delta);
  for (double x : d.rates.deltas) EXPECT_EQ(x, p.delta);
}

TEST(DistinctPlan, ShortHorizonRejected) {
  const std::vector<double> lam = {1.0, 2.0};
  const std::vector<QueueSpec> specs = {{5.0, 1.0}, {9.0, 1.0}};
  EXPECT_THROW(plan_distinct_rates(lam, base(50.0, specs), Scenario::kAllFlows),
               InfeasibleError);
}

TEST(Scaling, FingerprintFitsCompressedPhase) {
  const Codebook cb = generate_codebook(100, 1.0, 200.0, 4);
  for (double li : {1.0, 1.25, 2.0, 4.0}) {
    for (const Codeword& cw : cb.codewords) {
      const Codeword s = scale_codeword(cw, li, 1.0);
      EXPECT_LE(s.release_offsets().back(), 200.0 * 1.0 / li * (1 + 1e-15));
      EXPECT_EQ(s.effective_horizon(), 200.0 / li);
    }
  }
}

ExperimentConfig degeneracy_config(Scenario sc) {
  ExperimentConfig c;
  c.scenario = sc;
  c.planner = base(sc == Scenario::kAllFlows ? 8000.0 : 600.0,
                   std::vector<QueueSpec>(4, QueueSpec{5.0, 1.0}));
  c.trials = 40;
  c.seed = 17;
  c.calibration_flows = 100;
  c.desk.m_cap = 4;
  if (sc == Scenario::kProbabilistic) {
    c.desk.M_cap = 4;
    c.desk.p = 0.5;
  }
  return c;
}

TEST(Degeneracy, EqualRateListIsBitIdentical) {
  for (Scenario sc : {Scenario::kAllFlows, Scenario::kProbabilistic}) {
    const ExperimentConfig plain = degeneracy_config(sc);
    ExperimentConfig listed = plain;
    listed.lambdas.assign(4, 1.0);
    const Experiment a = prepare(plain);
    const Experiment b = prepare(listed);
    EXPECT_FALSE(b.distinct_rates);
    EXPECT_EQ(a.plan.T1, b.plan.T1);
    EXPECT_EQ(a.deltas, b.deltas);
    EXPECT_EQ(a.none_threshold, b.none_threshold);
    const auto ra = run_trials(a, ExecPolicy::kSerial);
    const auto rb = run_trials(b, ExecPolicy::kSerial);
    ASSERT_EQ(ra.size(), rb.size());
    for (std::size_t k = 0; k < ra.size(); ++k) {
      EXPECT_EQ(ra[k], rb[k]) << "trial " << k;
    }
  }
}

TEST(Scaling, RoundTripThroughTransparentQueue) {
  const double lambda_min = 1.0, T1 = 400.0, T2 = 40.0, T = T1 + T2;
  const Codebook cb = generate_codebook(16, lambda_min, T2, 31);
  const double rates[] = {1.0, 1.25, 2.0, 4.0};
  int recovered = 0, attempted = 0;
  for (std::uint64_t k = 0; k < 500; ++k) {
    const double li = rates[k % 4];
    const std::size_t truth = k % cb.size();
    const PacketTrace input = gen_poisson_trace(li, T, derive_seed(k, 1));
    const Codeword cw = scale_codeword(cb[truth], li, lambda_min);
    Rng rng(derive_seed(k, 2));
    const EmbedResult e = embed(input, {li, 0.2 * li, T1, T}, cw, truth, rng,
                                {SlowdownMode::kTimeStretch, li != lambda_min});
    ASSERT_FALSE(e.failed()) << k;
    const QueueSpec spec{1e6, 0.0};
    const QueueOutput q = simulate_queue(e.output, spec, derive_seed(k, 3), T);
    const DecodeScore got =
        rescale_and_decode(q.main_departures, li, lambda_min, cb, T1,
                           spec.effective_rate(),
                           {.flow_rate = lambda_min, .ignore_excess = true});
    ++attempted;
    if (got.index == truth) ++recovered;
  }
  EXPECT_EQ(recovered, attempted);
}

TEST(Scaling, RescaleInvertsCompression) {
  const Codeword cw({1.0, 0.5, 2.0}, 1.0, 5.0);
  const Codeword s = scale_codeword(cw, 4.0, 1.0);
  PacketTrace t;
  for (double o : s.release_offsets()) t.timestamps.push_back(10.0 + o);
  const PacketTrace back = rescale_trace(t, 10.0, 4.0, 1.0);
  const auto offsets = cw.release_offsets();
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    EXPECT_NEAR(back.timestamps[k], 10.0 + offsets[k], 1e-14);
  }
}

TEST(DistinctRates, DecodeAccuracyOnThreeRates) {
  // Rates {1, 2, 4}; every queue leaves mu - lambda' = 4 lambda_i, so
  // C' = ln 4 and ln M / T2 is far below C' / 2.
  ExperimentConfig c;
  c.planner = base(6000.0, {{5.0, 1.0}, {10.0, 2.0}, {20.0, 4.0}});
  c.lambdas = {1.0, 2.0, 4.0};
  c.trials = 1000;
  c.seed = 23;
  const Experiment ex = prepare(c);
  ASSERT_TRUE(ex.distinct_rates);
  ASSERT_EQ(ex.plan.m, 3u);
  EXPECT_LE(std::log(double(ex.plan.M)) / ex.plan.T2, 0.5 * ex.plan.C);
  const AggregateReport r = aggregate(run_trials(ex));
  EXPECT_GE(r.decode_acc.value, 0.99);
  EXPECT_GT(r.decode_acc.samples, 2500u);
}

}  // namespace
}  // namespace flowprint
