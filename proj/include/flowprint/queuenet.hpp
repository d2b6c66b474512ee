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

// Parallel FIFO single-server queues with exponential service, each shared by
// one main flow and a Poisson interference stream.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "flowprint/numerics.hpp"
#include "flowprint/parallel.hpp"
#include "flowprint/traffic.hpp"

namespace flowprint {

// Interference packets are tagged with this flow id inside a queue.
inline constexpr std::uint32_t kInterferenceFlow = 0xffffffffu;

enum class QueueEventKind : std::uint8_t { kArrival, kServiceStart, kDeparture };

struct QueueEvent {
  QueueEventKind kind;
  double time;
  std::uint32_t flow_id;
};

struct QueueOutput {
  PacketTrace main_departures;         // the main flow as seen on the output link
  TaggedTrace all_departures;          // main and interference, in service order
  std::vector<double> main_sojourn;    // per main packet, departure - arrival
  std::vector<double> all_sojourn;     // per served packet
  std::size_t main_after_horizon = 0;  // main packets drained past the horizon
  double horizon = 0.0;
};

// Core FIFO recursion with given service times: d_k = max(d_{k-1}, a_k) + s_k.
// `arrivals` must be sorted and `service.size() == arrivals.size()`.
QueueOutput serve_fifo(const TaggedTrace& arrivals,
                       std::span<const double> service,
                       std::uint32_t main_flow_id,
                       std::vector<QueueEvent>* event_log = nullptr);

// Draws interference over [0, horizon), merges it with `main` and serves the
// union with Exponential(mu) service times drawn at each service start.
// Packets still in the system at the horizon are drained. Throws
// std::invalid_argument if the queue cannot be stable.
QueueOutput simulate_queue(const PacketTrace& main, const QueueSpec& spec,
                           std::uint64_t seed, double horizon,
                           std::vector<QueueEvent>* event_log = nullptr);

// Queue i carries flows[i]; its randomness comes from (master_seed, i).
std::vector<QueueOutput> simulate_network(std::span<const PacketTrace> flows,
                                          std::span<const QueueSpec> specs,
                                          std::uint64_t master_seed,
                                          double horizon,
                                          ExecPolicy policy = ExecPolicy::kSerial);

std::uint64_t queue_seed(std::uint64_t master_seed, std::size_t index);

// CSV "event_type,time,flow_id".
void write_event_log_csv(std::ostream& os, std::span<const QueueEvent> log);

}  // namespace flowprint
