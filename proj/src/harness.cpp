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

#include "flowprint/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <random>
#include <string>

#include "flowprint/codebook.hpp"
#include "flowprint/decoder.hpp"
#include "flowprint/errors.hpp"
#include "flowprint/queuenet.hpp"
#include "flowprint/rates_ext.hpp"
#include "flowprint/rng.hpp"
#include "flowprint/stats.hpp"
#include "flowprint/traffic.hpp"

namespace flowprint {
namespace {

// Simulation sizes beyond these are a planning mistake, not a workload.
constexpr std::uint64_t kMaxSimulatedFlows = 100000;
constexpr std::uint64_t kMaxSimulatedCodewords = 1000000;

template <typename Fn>
void for_each_index(std::uint64_t n, ExecPolicy policy, Fn&& fn) {
  const auto count = static_cast<std::int64_t>(n);
  if (policy == ExecPolicy::kSerial) {
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::uint64_t>(i));
    return;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::uint64_t>(i));
    } catch (...) {
#pragma omp critical(flowprint_harness_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

EmbedOptions embed_options(const Experiment& ex) {
  return {ex.config.slowdown, ex.distinct_rates};
}

DecodeOptions decode_options(const Experiment& ex) {
  DecodeOptions o;
  o.flow_rate = ex.plan.lambda;
  o.ignore_excess = ex.distinct_rates;
  return o;
}

Codeword flow_codeword(const Experiment& ex, const Codeword& base,
                       std::size_t flow) {
  return ex.distinct_rates
             ? scale_codeword(base, ex.lambdas[flow], ex.plan.lambda)
             : base;
}

struct ResolvedPlan {
  PlannerInputs inputs;
  ScenarioPlan plan;
  std::optional<DistinctRatePlan> rates;
};

ResolvedPlan resolve(const ExperimentConfig& config) {
  config.validate();
  ResolvedPlan r;
  r.inputs = config.planner;
  if (config.target_flows) {
    r.inputs.T = min_horizon_for_flows(r.inputs, *config.target_flows);
  }
  // A queue list fixes the network size; a single queue is a template.
  DeskScale desk = config.desk;
  const std::size_t listed = r.inputs.queue_specs.size();
  if (listed > 1 && (!desk.m_cap || *desk.m_cap > listed)) {
    desk.m_cap = listed;
  }
  if (!config.lambdas.empty()) {
    r.rates = plan_distinct_rates(config.lambdas, r.inputs, config.scenario,
                                  desk);
    r.plan = r.rates->plan;
  } else {
    r.plan = plan(config.scenario, r.inputs, desk);
  }
  return r;
}

}  // namespace

ScenarioPlan plan_experiment(const ExperimentConfig& config) {
  return resolve(config).plan;
}

Experiment prepare(const ExperimentConfig& config) {
  ResolvedPlan r = resolve(config);
  Experiment ex;
  ex.config = config;
  ex.config.planner.T = r.inputs.T;
  ex.config.target_flows.reset();
  ex.plan = r.plan;
  if (ex.plan.m > kMaxSimulatedFlows) {
    throw ConfigError("m", "planned flow count " + std::to_string(ex.plan.m) +
                               " is too large to simulate; set a desk-scale "
                               "cap");
  }
  const std::size_t m = ex.plan.m;
  if (r.rates) {
    ex.lambdas = r.rates->rates.lambdas;
    ex.deltas = r.rates->rates.deltas;
    ex.specs = r.inputs.queue_specs;
    ex.distinct_rates = !all_equal(config.lambdas);
  } else {
    if (r.inputs.queue_specs.size() > 1) {
      ex.specs.assign(r.inputs.queue_specs.begin(),
                      r.inputs.queue_specs.begin() + m);
    } else {
      ex.specs.assign(m, r.inputs.queue_specs.front());
    }
    ex.lambdas.assign(m, ex.plan.lambda);
    ex.deltas.assign(m, ex.plan.delta);
  }
  if (ex.plan.M > kMaxSimulatedCodewords) {
    throw ConfigError("M", "codebook size " + std::to_string(ex.plan.M) +
                               " is too large to simulate; set a desk-scale "
                               "cap");
  }

  if (config.decode && config.scenario == Scenario::kProbabilistic &&
      config.calibration_flows > 0) {
    const std::vector<double> scores = calibration_scores(ex);
    std::vector<double> finite;
    std::copy_if(scores.begin(), scores.end(), std::back_inserter(finite),
                 [](double s) { return std::isfinite(s); });
    if (!finite.empty()) {
      ex.none_threshold = stats::quantile(finite, config.none_quantile);
    }
  }
  return ex;
}

std::vector<double> calibration_scores(const Experiment& ex) {
  const ScenarioPlan& plan = ex.plan;
  const std::uint64_t n = ex.config.calibration_flows;
  const std::size_t m = ex.specs.size();
  std::vector<double> scores(n, kImpossible);
  for_each_index(n, ExecPolicy::kParallel, [&](std::uint64_t c) {
    const std::size_t i = c % m;
    const std::uint64_t base =
        derive_seed(ex.config.seed, c, i, StreamRole::kCalibration);
    Codebook cb;
    cb.rate = plan.lambda;
    cb.horizon = plan.T2;
    cb.codewords.push_back(generate_codeword(plan.lambda, plan.T2, base, 0));
    const PacketTrace input = gen_poisson_trace(
        ex.lambdas[i], plan.T,
        derive_seed(base, 0, i, StreamRole::kInputTraffic),
        static_cast<std::uint32_t>(i));
    Rng rng(derive_seed(base, 0, i, StreamRole::kSlowdown));
    const EmbedResult er =
        embed(input, {ex.lambdas[i], ex.deltas[i], plan.T1, plan.T},
              flow_codeword(ex, cb[0], i), 0, rng, embed_options(ex));
    if (er.failed()) return;
    const QueueOutput qo =
        simulate_queue(er.output, ex.specs[i],
                       derive_seed(base, 0, i, StreamRole::kQueue), plan.T);
    scores[c] = rescale_and_decode(qo.main_departures, ex.lambdas[i],
                                   plan.lambda, cb, plan.T1,
                                   ex.specs[i].effective_rate(),
                                   decode_options(ex))
                    .log_score;
  });
  return scores;
}

TrialOutcome run_trial(const Experiment& ex, std::uint64_t trial) {
  const ScenarioPlan& plan = ex.plan;
  const std::uint64_t seed = ex.config.seed;
  const std::size_t m = ex.specs.size();

  TrialOutcome out;
  out.trial = trial;
  out.flows = m;

  const Codebook cb =
      generate_codebook(plan.M, plan.lambda, plan.T2,
                        derive_seed(seed, trial, 0, StreamRole::kCodeword));
  const std::vector<std::uint8_t> selected =
      plan.scenario == Scenario::kAllFlows
          ? std::vector<std::uint8_t>(m, 1)
          : select_flows(m, plan.p,
                         derive_seed(seed, trial, 0, StreamRole::kSelection));
  const Assignment assignment = assign_fingerprints(selected, cb.size());
  out.selected = assignment.selected;

  std::vector<PacketTrace> alice_out(m);
  std::vector<std::uint8_t> embed_ok(m, 1);
  std::vector<std::uint64_t> counts_h1(m), counts_h0(m);
  for (std::size_t i = 0; i < m; ++i) {
    const PacketTrace input = gen_poisson_trace(
        ex.lambdas[i], plan.T,
        derive_seed(seed, trial, i, StreamRole::kInputTraffic),
        static_cast<std::uint32_t>(i));
    EmbedResult er;
    if (const auto& j = assignment.codeword_for_flow[i]) {
      Rng rng(derive_seed(seed, trial, i, StreamRole::kSlowdown));
      er = embed(input, {ex.lambdas[i], ex.deltas[i], plan.T1, plan.T},
                 flow_codeword(ex, cb[*j], i), *j, rng, embed_options(ex));
      ++out.fingerprinted;
      if (er.failure_kind == FailureKind::kBufferUnderrun) {
        ++out.underruns;
        embed_ok[i] = 0;
      }
    } else {
      er = pass_through(input, plan.T);
      if (selected[i]) ++out.exhausted;
    }
    counts_h1[i] = er.output.count_in(0.0, plan.T1);
    alice_out[i] = std::move(er.output);

    // The count of untouched Poisson traffic over [0, T1).
    Rng null_rng(derive_seed(seed, trial, i, StreamRole::kWillieNull));
    counts_h0[i] = std::poisson_distribution<std::uint64_t>(
        ex.lambdas[i] * plan.T1)(null_rng);
  }

  const auto lrt = [&](std::span<const std::uint64_t> counts) {
    return plan.scenario == Scenario::kAllFlows
               ? lrt_scenario1(counts, ex.lambdas, ex.deltas, plan.T1)
               : lrt_scenario2(counts, ex.lambdas, ex.deltas, plan.T1, plan.p);
  };
  const DetectorVerdict v1 = lrt(counts_h1);
  const DetectorVerdict v0 = lrt(counts_h0);
  out.stat_h1 = v1.statistic;
  out.stat_h0 = v0.statistic;
  out.decision_h1 = v1.decision;
  out.decision_h0 = v0.decision;

  if (ex.config.decode) {
    const std::vector<QueueOutput> qouts = simulate_network(
        alice_out, ex.specs, derive_seed(seed, trial, 0, StreamRole::kQueue),
        plan.T, ExecPolicy::kSerial);
    NetworkDecodeOptions o;
    o.decode = decode_options(ex);
    o.none_threshold = ex.none_threshold;
    if (ex.distinct_rates) o.lambdas = ex.lambdas;
    const DecodeResult dr = decode_network(qouts, cb, plan, ex.specs,
                                           assignment, embed_ok, o);
    out.decoded = true;
    out.decode_attempted = dr.attempted;
    out.decode_correct = dr.attempted - dr.failures;
    out.permutation_correct = dr.permutation_correct;
    out.false_present = dr.false_present;
  }
  return out;
}

std::vector<TrialOutcome> run_trials(const Experiment& ex, ExecPolicy policy) {
  std::vector<TrialOutcome> outcomes(ex.config.trials);
  for_each_index(ex.config.trials, policy,
                 [&](std::uint64_t k) { outcomes[k] = run_trial(ex, k); });
  return outcomes;
}

RateEstimate make_rate(std::uint64_t events, std::uint64_t samples) {
  RateEstimate r;
  r.events = events;
  r.samples = samples;
  if (samples > 0) {
    r.value = static_cast<double>(events) / static_cast<double>(samples);
    r.sigma = stats::binomial_sigma(r.value, static_cast<double>(samples));
  }
  return r;
}

AggregateReport aggregate(std::span<const TrialOutcome> outcomes) {
  AggregateReport r;
  std::uint64_t fingerprinted = 0, underruns = 0, selected = 0, exhausted = 0;
  std::uint64_t any_failure = 0, attempted = 0, correct = 0;
  std::uint64_t perm_trials = 0, perm_ok = 0;
  for (const TrialOutcome& t : outcomes) {
    ++r.trials;
    r.false_alarms += t.false_alarm();
    r.missed_detections += t.missed_detection();
    fingerprinted += t.fingerprinted;
    underruns += t.underruns;
    selected += t.selected;
    exhausted += t.exhausted;
    any_failure += (t.underruns + t.exhausted) > 0;
    attempted += t.decode_attempted;
    correct += t.decode_correct;
    if (t.decoded && t.decode_attempted > 0) {
      ++perm_trials;
      perm_ok += t.permutation_correct;
    }
    r.false_present += t.false_present;
  }
  r.pe = make_rate(r.false_alarms + r.missed_detections, 2 * r.trials);
  r.pf_underrun = make_rate(underruns, fingerprinted);
  r.pf_exhausted = make_rate(exhausted, selected);
  r.pf_any_trial = make_rate(any_failure, r.trials);
  r.decode_acc = make_rate(correct, attempted);
  r.permutation = make_rate(perm_ok, perm_trials);
  return r;
}

TheoryBounds theory_bounds(const Experiment& ex) {
  const ScenarioPlan& plan = ex.plan;
  TheoryBounds b;
  if (plan.scenario == Scenario::kAllFlows) {
    for (std::size_t i = 0; i < ex.lambdas.size(); ++i) {
      const double null_mean = ex.lambdas[i] * plan.T1;
      b.kl += poisson_kl((ex.lambdas[i] - ex.deltas[i]) * plan.T1, null_mean);
    }
  } else {
    b.kl = poisson_kl_bound(static_cast<double>(plan.m), plan.p, plan.delta,
                            plan.T1, plan.lambda);
  }
  b.pinsker = pinsker_bound(b.kl);
  b.pe_target = 0.5 - plan.epsilon;
  b.pf_target = plan.zeta;
  return b;
}

}  // namespace flowprint
