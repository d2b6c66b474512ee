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

#include "flowprint/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace flowprint {
namespace {

// Appends t, nudged up if rounding made it collide with the previous release.
void push_strict(std::vector<double>& out, double t) {
  if (!out.empty() && t <= out.back()) {
    t = std::nextafter(out.back(), std::numeric_limits<double>::max());
  }
  out.push_back(t);
}

std::size_t peak_occupancy(std::span<const double> arrivals,
                           std::span<const double> releases) {
  // Release k is of arrival k and never precedes it, so a two-pointer sweep
  // that admits arrivals first at ties is exact.
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t peak = 0;
  while (i < arrivals.size()) {
    if (j < releases.size() && releases[j] < arrivals[i]) {
      ++j;
    } else {
      ++i;
      peak = std::max(peak, i - j);
    }
  }
  return peak;
}

}  // namespace

std::string_view to_string(SlowdownMode m) noexcept {
  return m == SlowdownMode::kTimeStretch ? "time_stretch" : "schedule_deferral";
}

std::optional<SlowdownMode> parse_slowdown_mode(std::string_view s) noexcept {
  if (s == "time_stretch") return SlowdownMode::kTimeStretch;
  if (s == "schedule_deferral") return SlowdownMode::kScheduleDeferral;
  return std::nullopt;
}

std::string_view to_string(FailureKind k) noexcept {
  switch (k) {
    case FailureKind::kNone:
      return "none";
    case FailureKind::kBufferUnderrun:
      return "buffer_underrun";
    case FailureKind::kCodebookExhausted:
      return "codebook_exhausted";
  }
  return "unknown";
}

EmbedResult embed(const PacketTrace& input, const PhaseTiming& timing,
                  const Codeword& codeword, std::size_t fingerprint_id,
                  Rng& rng, const EmbedOptions& options) {
  const double T1 = timing.T1;
  const double T = timing.T;
  const double slowed = timing.lambda - timing.delta;
  if (!(T1 > 0.0) || !(T > T1)) {
    throw std::invalid_argument("embed: need 0 < T1 < T");
  }
  if (!(timing.delta >= 0.0) || !(slowed > 0.0)) {
    throw std::invalid_argument("embed: need 0 <= delta < lambda");
  }
  const std::vector<double> offsets = codeword.release_offsets();
  if (offsets.back() > (T - T1) * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "embed: codeword is longer than the fingerprinting phase");
  }

  EmbedResult res;
  res.fingerprint_id = fingerprint_id;
  res.output.flow_id = input.flow_id;
  res.output.side = LinkSide::kInput;

  const std::span<const double> arrivals = input.window(0.0, T);
  const std::size_t n = arrivals.size();
  res.arrived = n;
  std::vector<double>& out = res.output.timestamps;
  out.reserve(n);

  // Phase 1.
  switch (options.slowdown) {
    case SlowdownMode::kTimeStretch: {
      const double stretch = timing.lambda / slowed;
      for (double a : arrivals) {
        const double t = a * stretch;
        if (!(t < T1)) break;
        push_strict(out, t);
      }
      break;
    }
    case SlowdownMode::kScheduleDeferral: {
      std::exponential_distribution<double> gap(slowed);
      double slot = gap(rng);
      std::size_t k = 0;
      while (slot < T1 && k < n) {
        const double t = std::max(slot, arrivals[k]);
        if (!(t < T1)) break;
        push_strict(out, t);
        ++k;
        slot += gap(rng);
      }
      break;
    }
  }
  res.phase1_released = out.size();

  // Phase 2.
  std::size_t next = res.phase1_released;
  for (std::size_t k = 0; k < offsets.size(); ++k, ++next) {
    const double epoch = T1 + offsets[k];
    if (next < n && arrivals[next] <= epoch) {
      push_strict(out, epoch);
      ++res.codeword_released;
      continue;
    }
    if (!res.underrun_at) {
      res.underrun_at = k;
      res.failure_kind = FailureKind::kBufferUnderrun;
    }
    if (next >= n) break;
    // Late packet: forwarded on arrival so the trace stays causal.
    push_strict(out, arrivals[next]);
    ++res.codeword_released;
  }

  if (options.release_excess && !out.empty()) {
    std::exponential_distribution<double> gap(timing.lambda);
    double t = out.back();
    while (out.size() < n) {
      t += gap(rng);
      const double release = std::max(t, arrivals[out.size()]);
      if (!(release < T)) break;
      push_strict(out, release);
      t = release;
    }
  }

  res.still_buffered = n - out.size();
  res.buffer_peak = peak_occupancy(arrivals, out);
  return res;
}

EmbedResult pass_through(const PacketTrace& input, double T) {
  EmbedResult res;
  res.output.flow_id = input.flow_id;
  const auto w = input.window(0.0, T);
  res.output.timestamps.assign(w.begin(), w.end());
  res.arrived = w.size();
  return res;
}

std::size_t buffered_at(const PacketTrace& input, const PacketTrace& output,
                        double t) {
  const auto arrived = static_cast<std::size_t>(
      std::upper_bound(input.timestamps.begin(), input.timestamps.end(), t) -
      input.timestamps.begin());
  const auto released = static_cast<std::size_t>(
      std::upper_bound(output.timestamps.begin(), output.timestamps.end(), t) -
      output.timestamps.begin());
  return arrived - released;
}

std::vector<std::uint8_t> select_flows(std::size_t m, double p,
                                       std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("select_flows: p must lie in [0, 1]");
  }
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::uint8_t> out(m);
  for (auto& x : out) x = coin(rng) ? 1 : 0;
  return out;
}

Assignment assign_fingerprints(std::span<const std::uint8_t> selected,
                               std::size_t codebook_size) {
  Assignment a;
  a.codeword_for_flow.resize(selected.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (!selected[i]) continue;
    ++a.selected;
    if (next < codebook_size) {
      a.codeword_for_flow[i] = next++;
    } else {
      a.exhausted = true;
    }
  }
  return a;
}

}  // namespace flowprint
