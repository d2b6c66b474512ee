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

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "flowprint/errors.hpp"
#include "flowprint/harness.hpp"

namespace flowprint {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"experiment",
       {"scenario", "trials", "seed", "slowdown", "decode",
        "calibration_flows"}},
      {"planner", {"T", "target_flows", "epsilon", "zeta", "lambda"}},
      {"queues", {"mu", "lambda_prime", "count"}},
      {"desk_scale", {"m", "M", "p"}},
      {"rates", {"lambdas"}},
      {"decoder", {"none_quantile"}},
  };
  return keys;
}

double parse_double(const std::string& field, const std::string& text) {
  const std::string s = boost::trim_copy(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE ||
      !std::isfinite(v)) {
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& field, const std::string& text) {
  const std::string s = boost::trim_copy(text);
  if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
    throw ConfigError(field,
                      "expected a nonnegative integer, got '" + text + "'");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(field, "integer out of range");
  return v;
}

std::vector<double> parse_list(const std::string& field,
                               const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<double> out;
  out.reserve(parts.size());
  for (const std::string& p : parts) out.push_back(parse_double(field, p));
  return out;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string s = boost::to_lower_copy(boost::trim_copy(text));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(field, "expected a boolean, got '" + text + "'");
}

Scenario parse_scenario(const std::string& text) {
  const std::string s = boost::to_lower_copy(boost::trim_copy(text));
  if (s == "1" || s == "all_flows") return Scenario::kAllFlows;
  if (s == "2" || s == "probabilistic") return Scenario::kProbabilistic;
  throw ConfigError("scenario", "expected 1 or 2, got '" + text + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials", "trial count must be >= 1");
  if (desk.m_cap && *desk.m_cap < 1) throw ConfigError("m", "cap must be >= 1");
  if (desk.M_cap && *desk.M_cap < 1) throw ConfigError("M", "cap must be >= 1");
  if (desk.p && (!(*desk.p > 0.0) || *desk.p > 1.0)) {
    throw ConfigError("p", "fingerprint probability must lie in (0, 1]");
  }
  if (target_flows && scenario != Scenario::kAllFlows) {
    throw ConfigError("target_flows", "only the all-flows scenario plans T "
                                      "from a flow count");
  }
  if (target_flows && *target_flows < 1) {
    throw ConfigError("target_flows", "must be >= 1");
  }
  if (!(none_quantile >= 0.0) || !(none_quantile < 1.0)) {
    throw ConfigError("none_quantile", "must lie in [0, 1)");
  }
  if (!lambdas.empty() && planner.queue_specs.size() != 1 &&
      planner.queue_specs.size() != lambdas.size()) {
    throw ConfigError("lambdas", "need one rate per queue");
  }
  PlannerInputs probe = planner;
  if (target_flows) probe.T = 1.0;
  if (!lambdas.empty()) {
    probe.lambda = *std::min_element(lambdas.begin(), lambdas.end());
  }
  probe.validate();
}

ExperimentConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", std::string("malformed INI: ") + e.message() +
                                    " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      throw ConfigError(section, "unknown section [" + section + "]");
    }
    for (const auto& kv : body) {
      if (!it->second.count(kv.first)) {
        throw ConfigError(kv.first, "unknown key in [" + section + "]");
      }
    }
  }
  auto get = [&](const char* section, const char* key) {
    return tree.get_optional<std::string>(pt::ptree::path_type(
        std::string(section) + "/" + key, '/'));
  };

  ExperimentConfig c;
  if (auto v = get("experiment", "scenario")) c.scenario = parse_scenario(*v);
  if (auto v = get("experiment", "trials")) c.trials = parse_count("trials", *v);
  if (auto v = get("experiment", "seed")) c.seed = parse_count("seed", *v);
  if (auto v = get("experiment", "slowdown")) {
    auto mode = parse_slowdown_mode(boost::trim_copy(*v));
    if (!mode) {
      throw ConfigError("slowdown",
                        "expected time_stretch or schedule_deferral");
    }
    c.slowdown = *mode;
  }
  if (auto v = get("experiment", "decode")) c.decode = parse_bool("decode", *v);
  if (auto v = get("experiment", "calibration_flows")) {
    c.calibration_flows = parse_count("calibration_flows", *v);
  }

  const auto T = get("planner", "T");
  const auto target = get("planner", "target_flows");
  if (T && target) {
    throw ConfigError("T", "give either T or target_flows, not both");
  }
  if (!T && !target) throw ConfigError("T", "missing horizon T");
  if (T) c.planner.T = parse_double("T", *T);
  if (target) c.target_flows = parse_count("target_flows", *target);
  const auto eps = get("planner", "epsilon");
  if (!eps) throw ConfigError("epsilon", "missing");
  c.planner.epsilon = parse_double("epsilon", *eps);
  const auto zeta = get("planner", "zeta");
  if (!zeta) throw ConfigError("zeta", "missing");
  c.planner.zeta = parse_double("zeta", *zeta);
  if (auto v = get("planner", "lambda")) {
    c.planner.lambda = parse_double("lambda", *v);
  }

  const auto mu_text = get("queues", "mu");
  if (!mu_text) throw ConfigError("mu", "missing");
  const auto lp_text = get("queues", "lambda_prime");
  const std::vector<double> mu = parse_list("mu", *mu_text);
  const std::vector<double> lp =
      lp_text ? parse_list("lambda_prime", *lp_text) : std::vector<double>{0.0};
  std::size_t n = std::max(mu.size(), lp.size());
  if (mu.size() != n && mu.size() != 1) {
    throw ConfigError("mu", "list length differs from lambda_prime");
  }
  if (lp.size() != n && lp.size() != 1) {
    throw ConfigError("lambda_prime", "list length differs from mu");
  }
  if (auto v = get("queues", "count")) {
    const std::uint64_t count = parse_count("count", *v);
    if (count < 1 || (n > 1 && count != n)) {
      throw ConfigError("count", "must be >= 1 and match the list lengths");
    }
    n = count;
  }
  const bool listed = n > 1 || get("queues", "count").has_value();
  for (std::size_t i = 0; i < (listed ? n : 1); ++i) {
    c.planner.queue_specs.push_back(
        {mu.size() == 1 ? mu[0] : mu[i], lp.size() == 1 ? lp[0] : lp[i]});
  }
  if (listed) c.desk.m_cap = n;

  if (auto v = get("desk_scale", "m")) {
    const std::uint64_t m = parse_count("m", *v);
    c.desk.m_cap = c.desk.m_cap ? std::min(*c.desk.m_cap, m) : m;
  }
  if (auto v = get("desk_scale", "M")) c.desk.M_cap = parse_count("M", *v);
  if (auto v = get("desk_scale", "p")) c.desk.p = parse_double("p", *v);

  if (auto v = get("rates", "lambdas")) {
    // The base codebook rate is the slowest flow.
    c.lambdas = parse_list("lambdas", *v);
    c.planner.lambda = *std::min_element(c.lambdas.begin(), c.lambdas.end());
  }
  if (auto v = get("decoder", "none_quantile")) {
    c.none_quantile = parse_double("none_quantile", *v);
  }
  if (!c.lambdas.empty() && c.planner.queue_specs.size() == 1) {
    c.planner.queue_specs.resize(c.lambdas.size(), c.planner.queue_specs[0]);
  }
  if (c.lambdas.empty() && c.planner.lambda == 0.0) {
    throw ConfigError("lambda", "missing");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

void apply_desk_scale(DeskScale& desk, const std::string& spec) {
  std::vector<std::string> parts;
  boost::split(parts, spec, boost::is_any_of(","));
  for (const std::string& part : parts) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("desk-scale", "expected key=value, got '" + part + "'");
    }
    const std::string key = boost::trim_copy(part.substr(0, eq));
    const std::string value = part.substr(eq + 1);
    if (key == "m") {
      desk.m_cap = parse_count("m", value);
    } else if (key == "M") {
      desk.M_cap = parse_count("M", value);
    } else if (key == "p") {
      desk.p = parse_double("p", value);
    } else {
      throw ConfigError("desk-scale", "unknown key '" + key + "'");
    }
  }
}

}  // namespace flowprint
