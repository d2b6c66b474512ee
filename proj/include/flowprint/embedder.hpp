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

// Alice's two-phase buffer-and-release embedder.
//
// Phase 1, [0, T1): the flow is slowed from lambda to lambda - delta and the
// surplus accumulates in Alice's buffer. Phase 2, [T1, T]: buffered packets
// leave at T1 + the codeword's release offsets, oldest first, while new
// arrivals keep being buffered. Packets always leave in arrival order, so
// output packet k is input packet k.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flowprint/codebook.hpp"
#include "flowprint/rng.hpp"
#include "flowprint/traffic.hpp"

namespace flowprint {

enum class SlowdownMode : std::uint8_t {
  // Packet arriving at a leaves at a * lambda / (lambda - delta). The phase-1
  // output is then exactly a Poisson(lambda - delta) process.
  kTimeStretch,
  // Independent Poisson(lambda - delta) release schedule; a slot that finds
  // the buffer empty is served at the next arrival instant.
  kScheduleDeferral,
};

std::string_view to_string(SlowdownMode m) noexcept;
std::optional<SlowdownMode> parse_slowdown_mode(std::string_view s) noexcept;

enum class FailureKind : std::uint8_t {
  kNone,
  kBufferUnderrun,
  kCodebookExhausted,
};

std::string_view to_string(FailureKind k) noexcept;

struct PhaseTiming {
  double lambda = 0.0;  // nominal rate of this flow
  double delta = 0.0;   // phase-1 slow-down
  double T1 = 0.0;
  double T = 0.0;
};

struct EmbedOptions {
  SlowdownMode slowdown = SlowdownMode::kTimeStretch;
  // Release arrivals beyond the codeword with Exponential(lambda) gaps instead
  // of holding them until T (distinct-rate extension).
  bool release_excess = false;
};

struct EmbedResult {
  PacketTrace output;
  std::optional<std::size_t> fingerprint_id;
  FailureKind failure_kind = FailureKind::kNone;
  std::size_t buffer_peak = 0;
  std::size_t arrived = 0;            // input packets in [0, T)
  std::size_t phase1_released = 0;    // output packets in [0, T1)
  std::size_t codeword_released = 0;  // codeword packets actually sent
  std::size_t still_buffered = 0;     // held at T
  std::optional<std::size_t> underrun_at;  // first codeword packet that was late

  bool failed() const noexcept { return failure_kind != FailureKind::kNone; }
};

// Throws std::invalid_argument if the codeword does not fit in [T1, T].
EmbedResult embed(const PacketTrace& input, const PhaseTiming& timing,
                  const Codeword& codeword, std::size_t fingerprint_id,
                  Rng& rng, const EmbedOptions& options = {});

// Unselected flows leave Alice untouched.
EmbedResult pass_through(const PacketTrace& input, double T);

// Number of packets Alice holds at time t.
std::size_t buffered_at(const PacketTrace& input, const PacketTrace& output,
                        double t);

// X_1..X_m i.i.d. Bernoulli(p).
std::vector<std::uint8_t> select_flows(std::size_t m, double p,
                                       std::uint64_t seed);

struct Assignment {
  // codeword_for_flow[i] is set iff flow i carries a fingerprint.
  std::vector<std::optional<std::size_t>> codeword_for_flow;
  std::size_t selected = 0;
  bool exhausted = false;  // more selected flows than codewords
};

// Codewords 0, 1, 2, ... go to the selected flows in index order. When the
// codebook runs out the remaining selected flows stay unfingerprinted and
// `exhausted` is set.
Assignment assign_fingerprints(std::span<const std::uint8_t> selected,
                               std::size_t codebook_size);

}  // namespace flowprint
