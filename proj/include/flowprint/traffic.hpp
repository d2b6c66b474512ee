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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "flowprint/rng.hpp"

namespace flowprint {

enum class LinkSide : std::uint8_t { kInput, kOutput };

// Packet timestamps of one flow on one link, strictly increasing.
struct PacketTrace {
  std::vector<double> timestamps;
  std::uint32_t flow_id = 0;
  LinkSide side = LinkSide::kInput;

  std::size_t size() const noexcept { return timestamps.size(); }
  bool empty() const noexcept { return timestamps.empty(); }

  // Packets with timestamp in [from, to).
  std::size_t count_in(double from, double to) const noexcept;
  std::span<const double> window(double from, double to) const noexcept;

  bool strictly_increasing() const noexcept;
};

// Union of several traces; `flow_ids[k]` is the origin of `timestamps[k]`.
struct TaggedTrace {
  std::vector<double> timestamps;
  std::vector<std::uint32_t> flow_ids;

  std::size_t size() const noexcept { return timestamps.size(); }
};

// Homogeneous Poisson process on [0, horizon); a packet exactly at the
// horizon is excluded.
PacketTrace gen_poisson_trace(double rate, double horizon, Rng& rng,
                              std::uint32_t flow_id = 0);
PacketTrace gen_poisson_trace(double rate, double horizon, std::uint64_t seed,
                              std::uint32_t flow_id = 0);

// Timestamp-sorted union; equal timestamps are ordered by flow_id, then by
// input order.
TaggedTrace merge_traces(std::span<const PacketTrace> traces);

// CSV with header "timestamp,flow_id" and 17 significant digits.
void write_trace_csv(std::ostream& os, const PacketTrace& trace);
void write_trace_csv(std::ostream& os, const TaggedTrace& trace);

}  // namespace flowprint
