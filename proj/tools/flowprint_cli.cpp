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

// flowprint command-line front end.
//
// Exit codes: 0 success, 1 runtime error, 2 config error, 3 infeasible plan.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowprint/codebook.hpp"
#include "flowprint/errors.hpp"
#include "flowprint/harness.hpp"
#include "flowprint/numerics.hpp"
#include "flowprint/parallel.hpp"
#include "flowprint/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> scenario;
  std::string desk_scale;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "experiment config (INI)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed (overrides config)");
  cmd->add_option("--scenario", o.scenario, "1: all flows, 2: probabilistic")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--desk-scale", o.desk_scale,
                  "caps, e.g. m=64,M=16,p=0.05");
  cmd->add_option("--threads", o.threads, "OpenMP threads (0: default)")
      ->check(CLI::NonNegativeNumber);
}

flowprint::ExperimentConfig load(const CommonOptions& o) {
  flowprint::ExperimentConfig c = flowprint::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.scenario) {
    c.scenario = *o.scenario == 1 ? flowprint::Scenario::kAllFlows
                                  : flowprint::Scenario::kProbabilistic;
  }
  if (!o.desk_scale.empty()) flowprint::apply_desk_scale(c.desk, o.desk_scale);
  flowprint::set_max_threads(o.threads);
  c.validate();
  return c;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

json plan_document(const flowprint::ScenarioPlan& p) {
  json j = flowprint::to_json(p);
  j["T1_plus_T2"] = p.T1 + p.T2;
  const double kl =
      p.scenario == flowprint::Scenario::kAllFlows
          ? static_cast<double>(p.m) *
                flowprint::poisson_kl((p.lambda - p.delta) * p.T1,
                                      p.lambda * p.T1)
          : flowprint::poisson_kl_bound(static_cast<double>(p.m), p.p,
                                        p.delta, p.T1, p.lambda);
  j["kl"] = kl;
  j["pinsker_bound"] = flowprint::pinsker_bound(kl);
  return j;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "lo:hi:n" is a log-spaced grid; otherwise a comma-separated list.
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(spec);
    if (!(is >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' ||
        !(lo > 0.0) || !(hi > lo) || n < 2) {
      throw flowprint::ConfigError("grid", "expected lo:hi:n with 0 < lo < hi");
    }
    for (int i = 0; i < n; ++i) {
      grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    }
    return grid;
  }
  std::istringstream is(spec);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    try {
      grid.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw flowprint::ConfigError("grid", "not a number: '" + cell + "'");
    }
  }
  return grid;
}

json report_trials(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw flowprint::ConfigError("in", "cannot open " + csv.string());
  const auto outcomes = flowprint::read_trials_csv(in);
  json j;
  j["kind"] = "trials";
  j["aggregate"] = flowprint::to_json(flowprint::aggregate(outcomes));
  const fs::path plan_path = csv.parent_path() / "plan.json";
  if (fs::exists(plan_path)) {
    std::ifstream p(plan_path);
    j["plan"] = json::parse(p);
  }
  return j;
}

json report_sweep(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw flowprint::ConfigError("in", "cannot open " + csv.string());
  const auto rows = flowprint::read_sweep_csv(in);
  json j;
  j["kind"] = "sweep";
  j["columns"] = {"T", "m_planned", "pe_emp", "pf_emp", "decode_acc"};
  j["rows"] = rows.size();
  j["feasible_rows"] = std::count_if(rows.begin(), rows.end(),
                                     [](const auto& r) { return r.feasible; });
  const fs::path meta_path = csv.parent_path() / "sweep.json";
  if (fs::exists(meta_path)) {
    std::ifstream m(meta_path);
    const json meta = json::parse(m);
    j["C"] = meta.at("C");
    if (meta.at("scenario") == "all_flows") {
      const auto top =
          std::span(rows).subspan(rows.size() / 2, rows.size() - rows.size() / 2);
      const auto fit = flowprint::fit_scaling_shape(top, meta.at("C"));
      j["shape_fit_top_half"] = {{"c", fit.c},
                                 {"max_rel_residual", fit.max_rel_residual}};
    }
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invisible flow fingerprinting over parallel M/M/1 queues"};
  app.require_subcommand(1);

  CommonOptions plan_opts;
  std::string plan_out;
  auto* plan_cmd = app.add_subcommand("plan", "print the scenario plan as JSON");
  add_common(plan_cmd, plan_opts);
  plan_cmd->add_option("--out", plan_out, "output file (default stdout)");

  CommonOptions cb_opts;
  std::string cb_out, cb_json;
  auto* cb_cmd = app.add_subcommand("gen-codebook", "draw the secret codebook");
  add_common(cb_cmd, cb_opts);
  cb_cmd->add_option("--out", cb_out, "binary codebook file")->required();
  cb_cmd->add_option("--json", cb_json, "also write a JSON copy");

  CommonOptions run_opts;
  std::optional<std::uint64_t> run_trials;
  std::string run_out;
  bool run_serial = false;
  auto* run_cmd = app.add_subcommand("run", "Monte-Carlo trials");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--trials", run_trials, "trial count (overrides config)")
      ->check(CLI::Range(std::uint64_t{1},
                         std::numeric_limits<std::uint64_t>::max(),
                         "trial count must be >= 1"));
  run_cmd->add_option("--out", run_out, "output directory")->required();
  run_cmd->add_flag("--serial", run_serial, "use the serial reference path");

  CommonOptions sweep_opts;
  std::string sweep_grid, sweep_out;
  std::uint64_t sweep_trials = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "plan (and run) over a T grid");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--grid", sweep_grid, "lo:hi:n (log) or a,b,c")
      ->required();
  sweep_cmd->add_option("--trials", sweep_trials, "trials per grid point");
  sweep_cmd->add_option("--out", sweep_out, "output directory")->required();

  std::string report_in, report_out;
  auto* report_cmd =
      app.add_subcommand("report", "fold a trials or sweep CSV into JSON");
  report_cmd->add_option("--in", report_in, "CSV file or run/sweep directory")
      ->required()
      ->check(CLI::ExistingPath);
  report_cmd->add_option("--out", report_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*plan_cmd) {
      const auto cfg = load(plan_opts);
      write_json(plan_out, plan_document(flowprint::plan_experiment(cfg)));
    } else if (*cb_cmd) {
      const auto cfg = load(cb_opts);
      const auto p = flowprint::plan_experiment(cfg);
      const auto cb = flowprint::generate_codebook(
          p.M, p.lambda, p.T2,
          flowprint::derive_seed(cfg.seed, 0, 0,
                                 flowprint::StreamRole::kCodeword));
      std::ofstream out(cb_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write '" + cb_out + "'");
      flowprint::write_codebook(out, cb);
      if (!cb_json.empty()) write_json(cb_json, flowprint::codebook_to_json(cb));
      std::cerr << "wrote " << cb.size() << " codewords to " << cb_out << '\n';
    } else if (*run_cmd) {
      auto cfg = load(run_opts);
      if (run_trials) cfg.trials = *run_trials;
      const auto ex = flowprint::prepare(cfg);
      const auto outcomes = flowprint::run_trials(
          ex, run_serial ? flowprint::ExecPolicy::kSerial
                         : flowprint::ExecPolicy::kParallel);
      fs::create_directories(run_out);
      write_json((fs::path(run_out) / "plan.json").string(),
                 plan_document(ex.plan));
      {
        auto out = open_out(fs::path(run_out) / "trials.csv");
        flowprint::write_trials_csv(out, outcomes);
      }
      json summary;
      summary["config"] = flowprint::to_json(ex.config);
      summary["aggregate"] =
          flowprint::to_json(flowprint::aggregate(outcomes));
      summary["theory"] = flowprint::to_json(flowprint::theory_bounds(ex));
      if (std::isfinite(ex.none_threshold)) {
        summary["none_threshold"] = ex.none_threshold;
      }
      write_json((fs::path(run_out) / "summary.json").string(), summary);
      std::cout << summary["aggregate"].dump(2) << '\n';
    } else if (*sweep_cmd) {
      const auto cfg = load(sweep_opts);
      const auto grid = parse_grid(sweep_grid);
      const auto rows = flowprint::sweep_T(cfg, grid, sweep_trials);
      fs::create_directories(sweep_out);
      {
        auto out = open_out(fs::path(sweep_out) / "sweep.csv");
        flowprint::write_sweep_csv(out, rows);
      }
      json meta;
      meta["scenario"] = std::string(flowprint::to_string(cfg.scenario));
      meta["C"] = flowprint::capacity(cfg.planner.lambda,
                                      cfg.planner.queue_specs);
      meta["epsilon"] = cfg.planner.epsilon;
      meta["zeta"] = cfg.planner.zeta;
      json points = json::array();
      for (const auto& r : rows) {
        points.push_back({{"T", r.T},
                          {"feasible", r.feasible},
                          {"m_planned", r.m_planned},
                          {"log_m_exact", r.log_m_exact},
                          {"shape_ratio", r.shape_ratio},
                          {"note", r.note}});
      }
      meta["points"] = points;
      write_json((fs::path(sweep_out) / "sweep.json").string(), meta);
      std::cerr << "wrote " << rows.size() << " grid points to " << sweep_out
                << '\n';
    } else if (*report_cmd) {
      fs::path in(report_in);
      if (fs::is_directory(in)) {
        if (fs::exists(in / "trials.csv")) {
          in /= "trials.csv";
        } else if (fs::exists(in / "sweep.csv")) {
          in /= "sweep.csv";
        } else {
          throw flowprint::ConfigError("in", "no trials.csv or sweep.csv in " +
                                                 in.string());
        }
      }
      std::ifstream probe(in);
      std::string header;
      std::getline(probe, header);
      const json j = header.rfind("T,", 0) == 0 ? report_sweep(in)
                                                : report_trials(in);
      write_json(report_out, j);
    }
  } catch (const flowprint::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const flowprint::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
