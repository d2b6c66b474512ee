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

// Bob's maximum-likelihood fingerprint decoder.
//
// A codeword hypothesizes the queue arrival times a_k = T1 + offset_k of the
// fingerprint packets. Against the observed departures d_k the implied
// service times are s_k = d_k - max(d_{k-1}, a_k), and the codeword is scored
// with the exponential service likelihood sum(ln mu - mu s_k) at the queue's
// effective rate mu - lambda'. Any s_k <= 0 makes the codeword impossible.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flowprint/codebook.hpp"
#include "flowprint/embedder.hpp"
#include "flowprint/numerics.hpp"
#include "flowprint/parallel.hpp"
#include "flowprint/queuenet.hpp"
#include "flowprint/traffic.hpp"

namespace flowprint {

inline constexpr double kImpossible = -std::numeric_limits<double>::infinity();

struct DecodeOptions {
  // Rate of the flow in decoder time. Count mismatches cost
  // mu_eff * |n_obs - n_cw| / flow_rate.
  double flow_rate = 1.0;
  // Observed packets beyond the codeword length carry no fingerprint and are
  // dropped without penalty.
  bool ignore_excess = false;
  // Phase-1 packets can still be queued at T1; up to this many leading
  // departures after T1 may be explained as such leftovers. A leftover is
  // scored as served from T1 on, and j leftovers carry the prior
  // (1 - r) r^j of the main-flow backlog, r = flow_rate / mu_eff.
  std::size_t max_leading_skip = 8;
};

struct DecodeScore {
  std::size_t index = 0;
  double log_score = kImpossible;
  std::size_t skip = 0;

  bool feasible() const noexcept { return log_score > kImpossible; }
};

// Service-time log-likelihood of matching departures[k] with arrivals[k] for
// k < min(sizes). `prev_departure` is the departure preceding departures[0].
double match_log_likelihood(std::span<const double> departures,
                            std::span<const double> arrivals, double mu_eff,
                            double prev_departure = kImpossible);

// Best score of one codeword over the allowed leading skips. `observed` are
// the main-flow departures at or after T1.
DecodeScore score_codeword(std::span<const double> observed,
                           std::span<const double> release_offsets, double T1,
                           double mu_eff, const DecodeOptions& options);

// Argmax over the codebook; ties go to the lowest index.
DecodeScore ml_decode(const PacketTrace& output, const Codebook& codebook,
                      double T1, double mu_eff,
                      const DecodeOptions& options = {},
                      ExecPolicy policy = ExecPolicy::kSerial);

// Maps flow-i timestamps back to the base codeword rate (t -> T1 + (t - T1)
// lambda_i / lambda_min) and decodes against the base codebook. Service
// times stretch by the same factor, so the effective rate becomes
// mu_eff * lambda_min / lambda_i.
DecodeScore rescale_and_decode(const PacketTrace& output, double lambda_i,
                               double lambda_min, const Codebook& codebook,
                               double T1, double mu_eff,
                               const DecodeOptions& options = {});

PacketTrace rescale_trace(const PacketTrace& trace, double T1,
                          double lambda_i, double lambda_min);

struct FlowDecode {
  std::size_t flow = 0;
  std::optional<std::size_t> decoded;  // nullopt: declared unfingerprinted
  double log_score = kImpossible;
  std::optional<std::size_t> truth;
  bool eligible = true;  // the embedding succeeded (or the flow was untouched)
  bool correct = false;
};

struct DecodeResult {
  std::vector<FlowDecode> per_flow;
  bool permutation_correct = true;
  std::size_t attempted = 0;      // fingerprinted flows that were decoded
  std::size_t failures = 0;       // of those, wrong or missed
  std::size_t false_present = 0;  // unfingerprinted flows given a codeword
};

struct NetworkDecodeOptions {
  DecodeOptions decode;
  // Scores below this declare the flow unfingerprinted. Impossible scores are
  // always declared unfingerprinted.
  double none_threshold = kImpossible;
  // Per-flow rates for the distinct-rate extension; empty for equal rates.
  std::vector<double> lambdas;
  ExecPolicy policy = ExecPolicy::kSerial;
};

// `embed_ok[i]` is false when flow i suffered an embedding failure; such flows
// are reported but do not count toward decoding accuracy.
DecodeResult decode_network(std::span<const QueueOutput> outputs,
                            const Codebook& codebook, const ScenarioPlan& plan,
                            std::span<const QueueSpec> specs,
                            const Assignment& truth,
                            std::span<const std::uint8_t> embed_ok,
                            const NetworkDecodeOptions& options = {});

nlohmann::json to_json(const DecodeResult& r);

}  // namespace flowprint
