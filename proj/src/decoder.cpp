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

#include "flowprint/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace flowprint {

double match_log_likelihood(std::span<const double> departures,
                            std::span<const double> arrivals, double mu_eff,
                            double prev_departure) {
  const std::size_t n = std::min(departures.size(), arrivals.size());
  const double log_mu = std::log(mu_eff);
  double prev = prev_departure;
  double ll = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = departures[k];
    const double a = arrivals[k];
    if (a > d) return kImpossible;
    const double s = d - std::max(prev, a);
    if (!(s > 0.0)) return kImpossible;
    ll += log_mu - mu_eff * s;
    prev = d;
  }
  return ll;
}

DecodeScore score_codeword(std::span<const double> observed,
                           std::span<const double> release_offsets, double T1,
                           double mu_eff, const DecodeOptions& options) {
  DecodeScore best;
  if (observed.empty()) return best;
  std::vector<double> arrivals(release_offsets.size());
  std::transform(release_offsets.begin(), release_offsets.end(),
                 arrivals.begin(), [T1](double o) { return T1 + o; });
  const std::size_t n_cw = arrivals.size();
  const std::size_t max_skip =
      std::min(options.max_leading_skip, observed.size() - 1);
  const double r = options.flow_rate / mu_eff;
  const double log_r = std::log(r);
  const double log_backlog0 = std::log1p(-r);
  std::vector<double> leftover_arrivals(max_skip, T1);
  for (std::size_t skip = 0; skip <= max_skip; ++skip) {
    const auto obs = observed.subspan(skip);
    const double prev = skip > 0 ? observed[skip - 1] : kImpossible;
    const double leftovers = match_log_likelihood(
        observed.first(skip), std::span(leftover_arrivals).first(skip),
        mu_eff);
    double score = leftovers + static_cast<double>(skip) * log_r +
                   log_backlog0 +
                   match_log_likelihood(obs, arrivals, mu_eff, prev);
    if (score == kImpossible) continue;
    const auto diff = static_cast<double>(obs.size()) -
                      static_cast<double>(n_cw);
    if (!(options.ignore_excess && diff > 0.0)) {
      score -= mu_eff * std::abs(diff) / options.flow_rate;
    }
    if (score > best.log_score) {
      best.log_score = score;
      best.skip = skip;
    }
  }
  return best;
}

DecodeScore ml_decode(const PacketTrace& output, const Codebook& codebook,
                      double T1, double mu_eff, const DecodeOptions& options,
                      ExecPolicy policy) {
  if (!(mu_eff > options.flow_rate) || !(options.flow_rate > 0.0)) {
    throw std::invalid_argument(
        "ml_decode: need 0 < flow rate < effective service rate");
  }
  if (codebook.size() == 0) throw std::invalid_argument("ml_decode: empty codebook");
  const auto begin = std::lower_bound(output.timestamps.begin(),
                                      output.timestamps.end(), T1);
  const std::span<const double> observed(begin, output.timestamps.end());

  const auto M = static_cast<std::ptrdiff_t>(codebook.size());
  std::vector<DecodeScore> scores(codebook.size());
  auto score_one = [&](std::ptrdiff_t i) {
    scores[i] = score_codeword(observed, codebook[i].release_offsets(), T1,
                               mu_eff, options);
    scores[i].index = static_cast<std::size_t>(i);
  };
  if (policy == ExecPolicy::kParallel) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (std::ptrdiff_t i = 0; i < M; ++i) score_one(i);
  } else {
    for (std::ptrdiff_t i = 0; i < M; ++i) score_one(i);
  }

  DecodeScore best = scores[0];
  for (const DecodeScore& s : scores) {
    if (s.log_score > best.log_score) best = s;
  }
  return best;
}

PacketTrace rescale_trace(const PacketTrace& trace, double T1,
                          double lambda_i, double lambda_min) {
  const ScaleRatio r{lambda_i, lambda_min};
  if (r.is_identity()) return trace;
  PacketTrace out = trace;
  for (double& t : out.timestamps) t = T1 + (t - T1) * r.num / r.den;
  return out;
}

DecodeScore rescale_and_decode(const PacketTrace& output, double lambda_i,
                               double lambda_min, const Codebook& codebook,
                               double T1, double mu_eff,
                               const DecodeOptions& options) {
  if (!(lambda_min > 0.0) || !(lambda_i >= lambda_min)) {
    throw std::invalid_argument(
        "rescale_and_decode: need lambda_i >= lambda_min > 0");
  }
  const ScaleRatio r{lambda_min, lambda_i};
  if (r.is_identity()) return ml_decode(output, codebook, T1, mu_eff, options);
  return ml_decode(rescale_trace(output, T1, lambda_i, lambda_min), codebook,
                   T1, mu_eff * r.num / r.den, options);
}

DecodeResult decode_network(std::span<const QueueOutput> outputs,
                            const Codebook& codebook, const ScenarioPlan& plan,
                            std::span<const QueueSpec> specs,
                            const Assignment& truth,
                            std::span<const std::uint8_t> embed_ok,
                            const NetworkDecodeOptions& options) {
  const std::size_t m = outputs.size();
  if (specs.size() != m || truth.codeword_for_flow.size() != m ||
      embed_ok.size() != m) {
    throw std::invalid_argument("decode_network: per-flow inputs differ in size");
  }
  if (!options.lambdas.empty() && options.lambdas.size() != m) {
    throw std::invalid_argument("decode_network: one rate per flow required");
  }
  const double lambda_min =
      options.lambdas.empty()
          ? plan.lambda
          : *std::min_element(options.lambdas.begin(), options.lambdas.end());

  DecodeResult res;
  res.per_flow.resize(m);
  const auto mm = static_cast<std::ptrdiff_t>(m);
  auto decode_one = [&](std::ptrdiff_t i) {
    FlowDecode& fd = res.per_flow[i];
    fd.flow = static_cast<std::size_t>(i);
    fd.truth = truth.codeword_for_flow[i];
    fd.eligible = embed_ok[i] != 0;
    const double mu_eff = specs[i].effective_rate();
    const DecodeScore best =
        options.lambdas.empty()
            ? ml_decode(outputs[i].main_departures, codebook, plan.T1, mu_eff,
                        options.decode)
            : rescale_and_decode(outputs[i].main_departures,
                                 options.lambdas[i], lambda_min, codebook,
                                 plan.T1, mu_eff, options.decode);
    fd.log_score = best.log_score;
    if (best.feasible() && !(best.log_score < options.none_threshold)) {
      fd.decoded = best.index;
    }
    fd.correct = fd.decoded == fd.truth;
  };
  if (options.policy == ExecPolicy::kParallel) {
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
    for (std::ptrdiff_t i = 0; i < mm; ++i) decode_one(i);
  } else {
    for (std::ptrdiff_t i = 0; i < mm; ++i) decode_one(i);
  }

  for (const FlowDecode& fd : res.per_flow) {
    if (fd.truth) {
      if (!fd.eligible) continue;
      ++res.attempted;
      if (!fd.correct) {
        ++res.failures;
        res.permutation_correct = false;
      }
    } else if (fd.decoded) {
      ++res.false_present;
    }
  }
  return res;
}

nlohmann::json to_json(const DecodeResult& r) {
  nlohmann::json j;
  j["permutation_correct"] = r.permutation_correct;
  j["attempted"] = r.attempted;
  j["failures"] = r.failures;
  j["false_present"] = r.false_present;
  auto& flows = j["per_flow"] = nlohmann::json::array();
  for (const FlowDecode& fd : r.per_flow) {
    nlohmann::json f;
    f["flow"] = fd.flow;
    f["decoded"] = fd.decoded ? nlohmann::json(*fd.decoded) : nlohmann::json("none");
    f["truth"] = fd.truth ? nlohmann::json(*fd.truth) : nlohmann::json("none");
    f["log_score"] = std::isfinite(fd.log_score) ? nlohmann::json(fd.log_score)
                                                 : nlohmann::json("-inf");
    f["eligible"] = fd.eligible;
    f["correct"] = fd.correct;
    flows.push_back(std::move(f));
  }
  return j;
}

}  // namespace flowprint
