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
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "flowprint/errors.hpp"
#include "flowprint/harness.hpp"
#include "flowprint/parallel.hpp"
#include "test_util.hpp"

namespace flowprint {
namespace {

constexpr const char* kValid = R"(
[experiment]
scenario = 1
trials = 12
seed = 99
decode = true

[planner]
T = 8000
epsilon = 0.2
zeta = 0.1
lambda = 1

[queues]
mu = 5
lambda_prime = 1
)";

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

std::string field_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

std::string replace(std::string s, const std::string& from,
                    const std::string& to) {
  const auto pos = s.find(from);
  if (pos == std::string::npos) throw std::logic_error("fixture: " + from);
  return s.replace(pos, from.size(), to);
}

TEST(Config, ParsesValidDocument) {
  const ExperimentConfig c = parse(kValid);
  EXPECT_EQ(c.scenario, Scenario::kAllFlows);
  EXPECT_EQ(c.trials, 12u);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.planner.T, 8000.0);
  ASSERT_EQ(c.planner.queue_specs.size(), 1u);
  EXPECT_EQ(c.planner.queue_specs[0].mu, 5.0);
  EXPECT_FALSE(c.desk.m_cap.has_value());
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of(replace(kValid, "epsilon = 0.2", "epsilon = abc")),
            "epsilon");
  EXPECT_EQ(field_of(replace(kValid, "epsilon = 0.2", "")), "epsilon");
  EXPECT_EQ(field_of(replace(kValid, "zeta = 0.1", "zeta = 1.5")), "zeta");
  EXPECT_EQ(field_of(replace(kValid, "trials = 12", "trials = -4")), "trials");
  EXPECT_EQ(field_of(replace(kValid, "trials = 12", "trials = 0")), "trials");
  EXPECT_EQ(field_of(replace(kValid, "seed = 99", "sede = 99")), "sede");
  EXPECT_EQ(field_of(replace(kValid, "scenario = 1", "scenario = 3")),
            "scenario");
  EXPECT_EQ(field_of(replace(kValid, "mu = 5", "mu = 1.5")), "mu");
  EXPECT_EQ(field_of(replace(kValid, "T = 8000", "T = 8000\ntarget_flows = 4")),
            "T");
  EXPECT_EQ(field_of(std::string(kValid) + "[extra]\nx = 1\n"), "extra");
  EXPECT_EQ(field_of(replace(kValid, "decode = true", "decode = maybe")),
            "decode");
}

TEST(Config, QueueListsAndRates) {
  ExperimentConfig c = parse(replace(
      replace(kValid, "mu = 5", "mu = 5, 6, 7"), "lambda_prime = 1",
      "lambda_prime = 1, 1, 2\n[rates]\nlambdas = 1.5, 1, 2"));
  EXPECT_EQ(c.planner.queue_specs.size(), 3u);
  EXPECT_EQ(c.desk.m_cap, 3u);
  EXPECT_EQ(c.planner.lambda, 1.0);
  EXPECT_EQ(c.lambdas.size(), 3u);
  EXPECT_EQ(field_of(replace(replace(kValid, "mu = 5", "mu = 5, 6, 7"),
                             "lambda_prime = 1", "lambda_prime = 1, 2")),
            "lambda_prime");
}

TEST(Config, DeskScaleString) {
  DeskScale d;
  apply_desk_scale(d, "m=64,M=16,p=0.05");
  EXPECT_EQ(d.m_cap, 64u);
  EXPECT_EQ(d.M_cap, 16u);
  EXPECT_EQ(d.p, 0.05);
  try {
    apply_desk_scale(d, "q=3");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "desk-scale");
  }
}

TEST(Plan, TargetFlowsResolvesHorizon) {
  ExperimentConfig c = parse(kValid);
  c.target_flows = 8;
  const ScenarioPlan p = plan_experiment(c);
  EXPECT_EQ(p.m, 8u);
  EXPECT_EQ(p.T1 + p.T2, p.T);
}

TEST(Plan, OversizedNetworkNeedsCap) {
  ExperimentConfig c = parse(kValid);
  c.planner.T = 1e9;
  EXPECT_GT(plan_experiment(c).m, 100000u);
  try {
    prepare(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "m");
  }
  c.desk.m_cap = 4;
  c.decode = false;
  EXPECT_EQ(prepare(c).plan.m, 4u);
}

TEST(Trials, DeterministicAcrossThreadCounts) {
  const Experiment ex = prepare(parse(kValid));
  const auto serial = run_trials(ex, ExecPolicy::kSerial);
  ASSERT_EQ(serial.size(), 12u);
  for (int threads : {1, 2, 4}) {
    set_max_threads(threads);
    const auto par = run_trials(ex, ExecPolicy::kParallel);
    ASSERT_EQ(par.size(), serial.size());
    for (std::size_t k = 0; k < par.size(); ++k) {
      EXPECT_EQ(par[k], serial[k]) << "threads=" << threads << " trial=" << k;
    }
  }
  set_max_threads(0);
  // A single trial does not depend on which batch it ran in.
  EXPECT_EQ(run_trial(ex, 7), serial[7]);
}

TEST(Trials, OutcomeStructure) {
  const Experiment ex = prepare(parse(kValid));
  for (const TrialOutcome& t : run_trials(ex)) {
    EXPECT_EQ(t.flows, ex.plan.m);
    EXPECT_EQ(t.selected, t.flows);
    EXPECT_EQ(t.fingerprinted, t.flows);
    EXPECT_EQ(t.exhausted, 0u);
    EXPECT_TRUE(t.decoded);
    EXPECT_EQ(t.decode_attempted, t.fingerprinted - t.underruns);
    EXPECT_LE(t.decode_correct, t.decode_attempted);
    EXPECT_EQ(t.decision_h1 == Hypothesis::kH1, t.stat_h1 > 0.0);
    EXPECT_EQ(t.decision_h0 == Hypothesis::kH1, t.stat_h0 > 0.0);
  }
}

TEST(Trials, CsvRoundTrip) {
  const Experiment ex = prepare(parse(kValid));
  const auto outcomes = run_trials(ex);
  std::stringstream ss;
  write_trials_csv(ss, outcomes);
  const auto back = read_trials_csv(ss);
  ASSERT_EQ(back.size(), outcomes.size());
  for (std::size_t k = 0; k < back.size(); ++k) EXPECT_EQ(back[k], outcomes[k]);
  std::istringstream bad("trial,flows\n1,2\n");
  EXPECT_THROW(read_trials_csv(bad), ConfigError);
}

TEST(Aggregate, CountsArePlainSums) {
  std::vector<TrialOutcome> ts(3);
  ts[0].decision_h1 = Hypothesis::kH0;  // miss
  ts[0].decision_h0 = Hypothesis::kH0;
  ts[0].fingerprinted = 4;
  ts[0].underruns = 1;
  ts[0].decoded = true;
  ts[0].decode_attempted = 3;
  ts[0].decode_correct = 3;
  ts[0].permutation_correct = true;
  ts[1].decision_h1 = Hypothesis::kH1;
  ts[1].decision_h0 = Hypothesis::kH1;  // false alarm
  ts[1].fingerprinted = 4;
  ts[1].decoded = true;
  ts[1].decode_attempted = 4;
  ts[1].decode_correct = 3;
  ts[2].decision_h1 = Hypothesis::kH1;
  ts[2].fingerprinted = 4;
  ts[2].selected = 5;
  ts[2].exhausted = 1;
  const AggregateReport r = aggregate(ts);
  EXPECT_EQ(r.trials, 3u);
  EXPECT_EQ(r.false_alarms, 1u);
  EXPECT_EQ(r.missed_detections, 1u);
  EXPECT_NEAR(r.pe.value, 2.0 / 6.0, 1e-15);
  EXPECT_EQ(r.pf_underrun.events, 1u);
  EXPECT_EQ(r.pf_underrun.samples, 12u);
  EXPECT_EQ(r.pf_exhausted.events, 1u);
  EXPECT_EQ(r.pf_any_trial.events, 2u);
  EXPECT_EQ(r.decode_acc.events, 6u);
  EXPECT_EQ(r.decode_acc.samples, 7u);
  EXPECT_EQ(r.permutation.events, 1u);
  EXPECT_EQ(r.permutation.samples, 2u);
  EXPECT_NEAR(r.pe.sigma, std::sqrt((1.0 / 3) * (2.0 / 3) / 6), 1e-15);
  EXPECT_EQ(make_rate(0, 0).value, 0.0);
}

TEST(Theory, BoundsForBothScenarios) {
  const Experiment ex = prepare(parse(kValid));
  const TheoryBounds b = theory_bounds(ex);
  EXPECT_GT(b.kl, 0.0);
  EXPECT_LE(b.kl, 2.0 * 0.2 * 0.2);
  EXPECT_NEAR(b.pe_target, 0.3, 1e-15);
  EXPECT_EQ(b.pf_target, 0.1);
  EXPECT_NEAR(b.pinsker, 0.5 - std::sqrt(b.kl / 8.0), 1e-15);
  EXPECT_GE(b.pinsker, b.pe_target);

  ExperimentConfig c2 = parse(kValid);
  c2.scenario = Scenario::kProbabilistic;
  c2.planner.T = 1000;
  c2.desk = {.m_cap = 64, .M_cap = 16, .p = 0.05};
  c2.decode = false;
  const TheoryBounds b2 = theory_bounds(prepare(c2));
  EXPECT_NEAR(b2.kl, 0.02, 1e-12 * 0.02);
  EXPECT_NEAR(b2.pinsker, 0.45, 1e-12);
}

TEST(Json, ReportsCarryKeyFields) {
  const Experiment ex = prepare(parse(kValid));
  const nlohmann::json p = to_json(ex.plan);
  EXPECT_EQ(p["m"], ex.plan.m);
  EXPECT_EQ(p["scenario"], "all_flows");
  const nlohmann::json r = to_json(aggregate(run_trials(ex)));
  EXPECT_TRUE(r.contains("pe_emp"));
  EXPECT_TRUE(r["pf_underrun"].contains("sigma"));
  EXPECT_EQ(to_json(ex.config)["seed"], 99);
}

TEST(Sweep, EmptyGridGivesNoRows) {
  const ExperimentConfig c = parse(kValid);
  EXPECT_TRUE(sweep_T(c, std::vector<double>{}, 0).empty());
  std::stringstream ss;
  write_sweep_csv(ss, std::vector<SweepRow>{});
  EXPECT_EQ(ss.str(), "T,m_planned,pe_emp,pf_emp,decode_acc\n");
  EXPECT_TRUE(read_sweep_csv(ss).empty());
}

TEST(Sweep, FlagsInfeasibleAndRoundTrips) {
  ExperimentConfig c = parse(kValid);
  c.decode = false;
  const std::vector<double> grid = {10.0, 5000.0, 20000.0};
  const auto rows = sweep_T(c, grid, 5, ExecPolicy::kSerial);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].feasible);
  EXPECT_FALSE(rows[0].note.empty());
  EXPECT_TRUE(rows[1].feasible);
  EXPECT_LE(rows[1].m_planned, rows[2].m_planned);
  EXPECT_FALSE(std::isnan(rows[2].pe_emp));
  EXPECT_TRUE(std::isnan(rows[2].decode_acc));

  std::stringstream ss;
  write_sweep_csv(ss, rows);
  const auto back = read_sweep_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].T, rows[k].T);
    EXPECT_EQ(back[k].m_planned, rows[k].m_planned);
    EXPECT_EQ(back[k].feasible, rows[k].feasible);
    EXPECT_EQ(std::isnan(back[k].pe_emp), std::isnan(rows[k].pe_emp));
    if (!std::isnan(rows[k].pe_emp)) EXPECT_EQ(back[k].pe_emp, rows[k].pe_emp);
  }
  const std::vector<double> bad = {100.0, 50.0};
  EXPECT_THROW(sweep_T(c, bad, 0), ConfigError);
}

TEST(Sweep, ShapeFitRecoversConstant) {
  const double C = 1.3;
  std::vector<SweepRow> rows;
  for (double T : testing::log_grid(1e4, 1e6, 10)) {
    SweepRow r;
    r.T = T;
    r.feasible = true;
    r.m_planned = static_cast<std::uint64_t>(
        std::llround(0.25 * T / testing::newton_lambert_w(C * T)));
    rows.push_back(r);
  }
  const ShapeFit fit = fit_scaling_shape(rows, C);
  EXPECT_NEAR(fit.c, 0.25, 1e-3);
  EXPECT_LT(fit.max_rel_residual, 1e-3);
}

}  // namespace
}  // namespace flowprint
