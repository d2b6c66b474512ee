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
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <nlohmann/json.hpp>

#include "flowprint/errors.hpp"
#include "flowprint/harness.hpp"

namespace flowprint {
namespace {

using nlohmann::json;

constexpr const char* kTrialsHeader =
    "trial,flows,selected,fingerprinted,underruns,exhausted,stat_h1,stat_h0,"
    "decision_h1,decision_h0,decoded,decode_attempted,decode_correct,"
    "permutation_correct,false_present";
constexpr const char* kSweepHeader = "T,m_planned,pe_emp,pf_emp,decode_acc";

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

json rate_json(const RateEstimate& r) {
  return {{"events", r.events},
          {"samples", r.samples},
          {"value", r.value},
          {"sigma", r.sigma},
          {"ci3_low", std::max(0.0, r.value - 3.0 * r.sigma)},
          {"ci3_high", std::min(1.0, r.value + 3.0 * r.sigma)}};
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  boost::split(cells, line, boost::is_any_of(","));
  for (auto& c : cells) boost::trim(c);
  return cells;
}

double cell_double(const std::string& s, const char* field) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError(field, "not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t cell_count(const std::string& s, const char* field) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError(field, "not an integer: '" + s + "'");
  }
  return v;
}

Hypothesis cell_hypothesis(const std::string& s, const char* field) {
  if (s == "H0") return Hypothesis::kH0;
  if (s == "H1") return Hypothesis::kH1;
  throw ConfigError(field, "expected H0 or H1, got '" + s + "'");
}

}  // namespace

json to_json(const ScenarioPlan& p) {
  return {{"scenario", std::string(to_string(p.scenario))},
          {"T", p.T},
          {"T1", p.T1},
          {"T2", p.T2},
          {"epsilon", p.epsilon},
          {"zeta", p.zeta},
          {"lambda", p.lambda},
          {"C", p.C},
          {"alpha", p.alpha},
          {"m", p.m},
          {"M", p.M},
          {"p", p.p},
          {"delta", p.delta},
          {"slowdown_exponent", p.slowdown_exponent},
          {"log_m_exact", finite_or_null(p.log_m_exact)},
          {"log_M_exact", finite_or_null(p.log_M_exact)},
          {"log_p_exact", finite_or_null(p.log_p_exact)},
          {"desk_capped", p.desk_capped}};
}

json to_json(const AggregateReport& r) {
  return {{"trials", r.trials},
          {"false_alarms", r.false_alarms},
          {"missed_detections", r.missed_detections},
          {"pe_emp", rate_json(r.pe)},
          {"pf_underrun", rate_json(r.pf_underrun)},
          {"pf_exhausted", rate_json(r.pf_exhausted)},
          {"pf_any_trial", rate_json(r.pf_any_trial)},
          {"decode_acc", rate_json(r.decode_acc)},
          {"permutation_recovery", rate_json(r.permutation)},
          {"false_present", r.false_present}};
}

json to_json(const TheoryBounds& b) {
  return {{"kl", b.kl},
          {"pinsker_bound", b.pinsker},
          {"pe_target", b.pe_target},
          {"pf_target", b.pf_target}};
}

json to_json(const ExperimentConfig& c) {
  json queues = json::array();
  for (const QueueSpec& q : c.planner.queue_specs) {
    queues.push_back({{"mu", q.mu}, {"lambda_prime", q.interference_rate}});
  }
  json desk = json::object();
  if (c.desk.m_cap) desk["m"] = *c.desk.m_cap;
  if (c.desk.M_cap) desk["M"] = *c.desk.M_cap;
  if (c.desk.p) desk["p"] = *c.desk.p;
  json j = {{"scenario", std::string(to_string(c.scenario))},
            {"T", c.planner.T},
            {"epsilon", c.planner.epsilon},
            {"zeta", c.planner.zeta},
            {"lambda", c.planner.lambda},
            {"queues", queues},
            {"trials", c.trials},
            {"seed", c.seed},
            {"slowdown", std::string(to_string(c.slowdown))},
            {"decode", c.decode},
            {"desk_scale", desk},
            {"none_quantile", c.none_quantile}};
  if (c.target_flows) j["target_flows"] = *c.target_flows;
  if (!c.lambdas.empty()) j["lambdas"] = c.lambdas;
  return j;
}

void write_trials_csv(std::ostream& os,
                      std::span<const TrialOutcome> outcomes) {
  const auto old = os.precision(17);
  os << kTrialsHeader << '\n';
  for (const TrialOutcome& t : outcomes) {
    os << t.trial << ',' << t.flows << ',' << t.selected << ','
       << t.fingerprinted << ',' << t.underruns << ',' << t.exhausted << ','
       << t.stat_h1 << ',' << t.stat_h0 << ',' << to_string(t.decision_h1)
       << ',' << to_string(t.decision_h0) << ',' << int(t.decoded) << ','
       << t.decode_attempted << ',' << t.decode_correct << ','
       << int(t.permutation_correct) << ',' << t.false_present << '\n';
  }
  os.precision(old);
}

std::vector<TrialOutcome> read_trials_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || boost::trim_copy(line) != kTrialsHeader) {
    throw ConfigError("trials_csv", "missing or unexpected header");
  }
  std::vector<TrialOutcome> out;
  while (std::getline(is, line)) {
    if (boost::trim_copy(line).empty()) continue;
    const auto c = split_row(line);
    if (c.size() != 15) {
      throw ConfigError("trials_csv",
                        "row has " + std::to_string(c.size()) + " cells");
    }
    TrialOutcome t;
    t.trial = cell_count(c[0], "trial");
    t.flows = cell_count(c[1], "flows");
    t.selected = cell_count(c[2], "selected");
    t.fingerprinted = cell_count(c[3], "fingerprinted");
    t.underruns = cell_count(c[4], "underruns");
    t.exhausted = cell_count(c[5], "exhausted");
    t.stat_h1 = cell_double(c[6], "stat_h1");
    t.stat_h0 = cell_double(c[7], "stat_h0");
    t.decision_h1 = cell_hypothesis(c[8], "decision_h1");
    t.decision_h0 = cell_hypothesis(c[9], "decision_h0");
    t.decoded = cell_count(c[10], "decoded") != 0;
    t.decode_attempted = cell_count(c[11], "decode_attempted");
    t.decode_correct = cell_count(c[12], "decode_correct");
    t.permutation_correct = cell_count(c[13], "permutation_correct") != 0;
    t.false_present = cell_count(c[14], "false_present");
    out.push_back(t);
  }
  return out;
}

std::vector<SweepRow> sweep_T(const ExperimentConfig& config,
                              std::span<const double> grid,
                              std::uint64_t trials_per_point,
                              ExecPolicy policy) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError("grid", "T grid must be strictly increasing");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const double T : grid) {
    SweepRow row;
    row.T = T;
    ExperimentConfig cfg = config;
    cfg.planner.T = T;
    cfg.target_flows.reset();
    if (trials_per_point > 0) cfg.trials = trials_per_point;
    try {
      if (trials_per_point > 0) {
        const Experiment ex = prepare(cfg);
        row.m_planned = ex.plan.m;
        row.log_m_exact = ex.plan.log_m_exact;
        row.shape_ratio = static_cast<double>(ex.plan.m) *
                          lambert_w(ex.plan.C * T) / (ex.plan.C * T);
        const auto outcomes = run_trials(ex, policy);
        const AggregateReport agg = aggregate(outcomes);
        row.pe_emp = agg.pe.value;
        row.pf_emp = agg.pf_underrun.value;
        if (cfg.decode) row.decode_acc = agg.decode_acc.value;
      } else {
        const ScenarioPlan p = plan(cfg.scenario, cfg.planner, cfg.desk);
        row.m_planned = p.m;
        row.log_m_exact = p.log_m_exact;
        row.shape_ratio =
            static_cast<double>(p.m) * lambert_w(p.C * T) / (p.C * T);
      }
      row.feasible = true;
    } catch (const InfeasibleError& e) {
      row.feasible = false;
      row.m_planned = 0;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  const auto old = os.precision(17);
  os << kSweepHeader << '\n';
  auto num = [&os](double v) {
    if (std::isnan(v)) {
      os << "nan";
    } else {
      os << v;
    }
  };
  for (const SweepRow& r : rows) {
    num(r.T);
    os << ',' << r.m_planned << ',';
    num(r.pe_emp);
    os << ',';
    num(r.pf_emp);
    os << ',';
    num(r.decode_acc);
    os << '\n';
  }
  os.precision(old);
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || boost::trim_copy(line) != kSweepHeader) {
    throw ConfigError("sweep_csv", "missing or unexpected header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (boost::trim_copy(line).empty()) continue;
    const auto c = split_row(line);
    if (c.size() != 5) {
      throw ConfigError("sweep_csv",
                        "row has " + std::to_string(c.size()) + " cells");
    }
    SweepRow r;
    r.T = cell_double(c[0], "T");
    r.m_planned = cell_count(c[1], "m_planned");
    r.feasible = r.m_planned > 0;
    r.pe_emp = cell_double(c[2], "pe_emp");
    r.pf_emp = cell_double(c[3], "pf_emp");
    r.decode_acc = cell_double(c[4], "decode_acc");
    rows.push_back(r);
  }
  return rows;
}

ShapeFit fit_scaling_shape(std::span<const SweepRow> rows, double C) {
  if (!(C > 0.0)) throw std::invalid_argument("fit_scaling_shape: C <= 0");
  double sxy = 0.0, sxx = 0.0;
  for (const SweepRow& r : rows) {
    if (!r.feasible) continue;
    const double x = r.T / lambert_w(C * r.T);
    sxy += x * static_cast<double>(r.m_planned);
    sxx += x * x;
  }
  ShapeFit fit;
  if (sxx == 0.0) return fit;
  fit.c = sxy / sxx;
  for (const SweepRow& r : rows) {
    if (!r.feasible) continue;
    const double pred = fit.c * r.T / lambert_w(C * r.T);
    fit.max_rel_residual =
        std::max(fit.max_rel_residual,
                 std::abs(static_cast<double>(r.m_planned) - pred) / pred);
  }
  return fit;
}

}  // namespace flowprint
