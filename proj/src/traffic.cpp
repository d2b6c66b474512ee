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

#include "flowprint/traffic.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <cmath>
#include <random>
#include <stdexcept>

namespace flowprint {

std::size_t PacketTrace::count_in(double from, double to) const noexcept {
  return window(from, to).size();
}

std::span<const double> PacketTrace::window(double from,
                                            double to) const noexcept {
  const auto lo =
      std::lower_bound(timestamps.begin(), timestamps.end(), from);
  const auto hi = std::lower_bound(lo, timestamps.end(), to);
  return {lo, hi};
}

bool PacketTrace::strictly_increasing() const noexcept {
  return std::adjacent_find(timestamps.begin(), timestamps.end(),
                            std::greater_equal<>()) == timestamps.end();
}

PacketTrace gen_poisson_trace(double rate, double horizon, Rng& rng,
                              std::uint32_t flow_id) {
  if (!(rate >= 0.0)) throw std::invalid_argument("rate must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  PacketTrace trace;
  trace.flow_id = flow_id;
  if (rate == 0.0) return trace;
  trace.timestamps.reserve(static_cast<std::size_t>(rate * horizon * 1.05) +
                           16);
  std::exponential_distribution<double> gap(rate);
  double t = gap(rng);
  while (t < horizon) {
    // A zero gap would break strict ordering; it has probability ~2^-53.
    if (!trace.timestamps.empty() && t <= trace.timestamps.back()) {
      t = std::nextafter(trace.timestamps.back(), horizon);
      if (t >= horizon) break;
    }
    trace.timestamps.push_back(t);
    t += gap(rng);
  }
  return trace;
}

PacketTrace gen_poisson_trace(double rate, double horizon, std::uint64_t seed,
                              std::uint32_t flow_id) {
  Rng rng(seed);
  return gen_poisson_trace(rate, horizon, rng, flow_id);
}

TaggedTrace merge_traces(std::span<const PacketTrace> traces) {
  struct Item {
    double t;
    std::uint32_t flow;
  };
  std::size_t total = 0;
  for (const auto& tr : traces) total += tr.size();
  std::vector<Item> items;
  items.reserve(total);
  for (const auto& tr : traces) {
    for (double t : tr.timestamps) items.push_back({t, tr.flow_id});
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.flow < b.flow;
                   });
  TaggedTrace out;
  out.timestamps.reserve(total);
  out.flow_ids.reserve(total);
  for (const Item& it : items) {
    out.timestamps.push_back(it.t);
    out.flow_ids.push_back(it.flow);
  }
  return out;
}

void write_trace_csv(std::ostream& os, const PacketTrace& trace) {
  const auto old = os.precision(17);
  os << "timestamp,flow_id\n";
  for (double t : trace.timestamps) os << t << ',' << trace.flow_id << '\n';
  os.precision(old);
}

void write_trace_csv(std::ostream& os, const TaggedTrace& trace) {
  const auto old = os.precision(17);
  os << "timestamp,flow_id\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    os << trace.timestamps[k] << ',' << trace.flow_ids[k] << '\n';
  }
  os.precision(old);
}

}  // namespace flowprint
