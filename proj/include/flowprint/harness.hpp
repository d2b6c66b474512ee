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

// Monte-Carlo experiments over the full pipeline:
//
//   plan -> codebook -> traffic -> embed -> Willie (H1 and H0 samples)
//        -> queue network -> decode
//
// Trial k draws all of its randomness from (master seed, k), so outcomes do
// not depend on how trials are scheduled across threads.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flowprint/detector.hpp"
#include "flowprint/embedder.hpp"
#include "flowprint/numerics.hpp"
#include "flowprint/parallel.hpp"

namespace flowprint {

struct ExperimentConfig {
  Scenario scenario = Scenario::kAllFlows;
  PlannerInputs planner;  // planner.T is ignored when target_flows is set
  std::optional<std::uint64_t> target_flows;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  SlowdownMode slowdown = SlowdownMode::kTimeStretch;
  bool decode = true;  // run the queue network and Bob's decoder
  DeskScale desk;
  std::vector<double> lambdas;  // per-flow rates; empty for equal rates
  double none_quantile = 0.001;
  std::uint64_t calibration_flows = 1000;

  void validate() const;
};

// INI document; see README for the keys. Throws ConfigError naming the field.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

// Parses "m=64,M=16,p=0.05" into `desk`, overriding present keys.
void apply_desk_scale(DeskScale& desk, const std::string& spec);

// A config resolved into a concrete plan and network.
struct Experiment {
  ExperimentConfig config;
  ScenarioPlan plan;
  std::vector<QueueSpec> specs;  // one per flow, size plan.m
  std::vector<double> lambdas;   // per flow
  std::vector<double> deltas;    // per flow
  bool distinct_rates = false;
  double none_threshold = -std::numeric_limits<double>::infinity();
};

// The plan a config resolves to, without building the network. Resolves
// target_flows into a horizon.
ScenarioPlan plan_experiment(const ExperimentConfig& config);

// Plans, builds the network and calibrates the decoder. Infeasible configs
// throw here, before any trial runs.
Experiment prepare(const ExperimentConfig& config);

// Log-score Bob assigns to true fingerprints, one per calibration flow.
std::vector<double> calibration_scores(const Experiment& ex);

struct TrialOutcome {
  std::uint64_t trial = 0;
  std::uint64_t flows = 0;
  std::uint64_t selected = 0;
  std::uint64_t fingerprinted = 0;  // selected and given a codeword
  std::uint64_t underruns = 0;
  std::uint64_t exhausted = 0;      // selected but no codeword left
  double stat_h1 = 0.0;
  double stat_h0 = 0.0;
  Hypothesis decision_h1 = Hypothesis::kH0;
  Hypothesis decision_h0 = Hypothesis::kH0;
  bool decoded = false;             // decode stage ran
  std::uint64_t decode_attempted = 0;
  std::uint64_t decode_correct = 0;
  bool permutation_correct = false;
  std::uint64_t false_present = 0;

  bool missed_detection() const noexcept {
    return decision_h1 == Hypothesis::kH0;
  }
  bool false_alarm() const noexcept { return decision_h0 == Hypothesis::kH1; }

  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

TrialOutcome run_trial(const Experiment& ex, std::uint64_t trial);

std::vector<TrialOutcome> run_trials(const Experiment& ex,
                                     ExecPolicy policy = ExecPolicy::kParallel);

struct RateEstimate {
  std::uint64_t events = 0;
  std::uint64_t samples = 0;
  double value = 0.0;  // events / samples, 0 without samples
  double sigma = 0.0;  // binomial standard error of value
};

RateEstimate make_rate(std::uint64_t events, std::uint64_t samples);

struct AggregateReport {
  std::uint64_t trials = 0;
  std::uint64_t false_alarms = 0;
  std::uint64_t missed_detections = 0;
  RateEstimate pe;             // (P_FA + P_MD) / 2 over 2 * trials decisions
  RateEstimate pf_underrun;    // per fingerprinted flow
  RateEstimate pf_exhausted;   // per selected flow
  RateEstimate pf_any_trial;   // trials with at least one failure
  RateEstimate decode_acc;     // per decoded fingerprinted flow
  RateEstimate permutation;    // per trial with a decode attempt
  std::uint64_t false_present = 0;
};

// Single-consumer fold; the counts are plain sums over the records.
AggregateReport aggregate(std::span<const TrialOutcome> outcomes);

// Theoretical context reported next to the empirical rates.
struct TheoryBounds {
  double kl = 0.0;             // phase-1 relative entropy (exact or bound)
  double pinsker = 0.0;        // lower bound on Willie's error
  double pe_target = 0.0;      // 1/2 - epsilon
  double pf_target = 0.0;      // zeta
};

TheoryBounds theory_bounds(const Experiment& ex);

nlohmann::json to_json(const ScenarioPlan& plan);
nlohmann::json to_json(const AggregateReport& r);
nlohmann::json to_json(const TheoryBounds& b);
nlohmann::json to_json(const ExperimentConfig& c);

// Full 17-significant-digit CSV, one row per trial.
void write_trials_csv(std::ostream& os, std::span<const TrialOutcome> outcomes);
std::vector<TrialOutcome> read_trials_csv(std::istream& is);

struct SweepRow {
  double T = 0.0;
  bool feasible = false;
  std::string note;          // why the point is infeasible
  std::uint64_t m_planned = 0;
  double log_m_exact = 0.0;
  double shape_ratio = 0.0;  // m W(CT) / (CT), scenario 1
  double pe_emp = std::numeric_limits<double>::quiet_NaN();
  double pf_emp = std::numeric_limits<double>::quiet_NaN();
  double decode_acc = std::numeric_limits<double>::quiet_NaN();
};

// Plans each T of the increasing grid and, with trials_per_point > 0, backs
// it with that many trials. Infeasible points are flagged, not fatal.
std::vector<SweepRow> sweep_T(const ExperimentConfig& config,
                              std::span<const double> grid,
                              std::uint64_t trials_per_point,
                              ExecPolicy policy = ExecPolicy::kParallel);

// Header: T,m_planned,pe_emp,pf_emp,decode_acc
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

// Least-squares c in m(T) ~ c T / W(CT) over the given rows, and the largest
// relative residual.
struct ShapeFit {
  double c = 0.0;
  double max_rel_residual = 0.0;
};
ShapeFit fit_scaling_shape(std::span<const SweepRow> rows, double C);

}  // namespace flowprint
