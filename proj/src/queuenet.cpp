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

#include "flowprint/queuenet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "flowprint/rng.hpp"

namespace flowprint {
namespace {

// Single-server FIFO with next-event time advance. With one server and FIFO
// order the next event after an arrival is fully determined by the previous
// departure, which reduces the event loop to the departure recursion.
template <typename ServiceFn>
QueueOutput run_fifo(const TaggedTrace& arrivals, ServiceFn&& draw_service,
                     std::uint32_t main_flow_id,
                     std::vector<QueueEvent>* event_log) {
  QueueOutput out;
  const std::size_t n = arrivals.size();
  out.all_departures.timestamps.reserve(n);
  out.all_departures.flow_ids.reserve(n);
  out.all_sojourn.reserve(n);
  out.main_departures.flow_id = main_flow_id;
  out.main_departures.side = LinkSide::kOutput;
  if (event_log) event_log->reserve(event_log->size() + 3 * n);

  double last_departure = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double a = arrivals.timestamps[k];
    const std::uint32_t flow = arrivals.flow_ids[k];
    const double start = std::max(last_departure, a);
    double d = start + draw_service();
    if (d <= last_departure) {
      d = std::nextafter(last_departure, std::numeric_limits<double>::max());
    }
    last_departure = d;
    out.all_departures.timestamps.push_back(d);
    out.all_departures.flow_ids.push_back(flow);
    out.all_sojourn.push_back(d - a);
    if (flow == main_flow_id) {
      out.main_departures.timestamps.push_back(d);
      out.main_sojourn.push_back(d - a);
    }
    if (event_log) {
      event_log->push_back({QueueEventKind::kArrival, a, flow});
      event_log->push_back({QueueEventKind::kServiceStart, start, flow});
      event_log->push_back({QueueEventKind::kDeparture, d, flow});
    }
  }
  if (event_log) {
    std::stable_sort(event_log->begin(), event_log->end(),
                     [](const QueueEvent& x, const QueueEvent& y) {
                       return x.time < y.time;
                     });
  }
  return out;
}

}  // namespace

QueueOutput serve_fifo(const TaggedTrace& arrivals,
                       std::span<const double> service,
                       std::uint32_t main_flow_id,
                       std::vector<QueueEvent>* event_log) {
  if (service.size() != arrivals.size()) {
    throw std::invalid_argument("serve_fifo: one service time per packet");
  }
  std::size_t next = 0;
  return run_fifo(
      arrivals, [&] { return service[next++]; }, main_flow_id, event_log);
}

QueueOutput simulate_queue(const PacketTrace& main, const QueueSpec& spec,
                           std::uint64_t seed, double horizon,
                           std::vector<QueueEvent>* event_log) {
  if (!(spec.mu > 0.0) || !(spec.interference_rate >= 0.0) ||
      !(spec.interference_rate < spec.mu)) {
    throw std::invalid_argument(
        "simulate_queue: unstable queue (need 0 <= lambda' < mu)");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("simulate_queue: horizon must be > 0");
  }
  if (main.flow_id == kInterferenceFlow) {
    throw std::invalid_argument("simulate_queue: reserved main flow id");
  }
  Rng interference_rng(derive_seed(seed, 0, 0, StreamRole::kInterference));
  Rng service_rng(derive_seed(seed, 0, 0, StreamRole::kService));

  std::array<PacketTrace, 2> inputs{
      main, gen_poisson_trace(spec.interference_rate, horizon,
                              interference_rng, kInterferenceFlow)};
  const TaggedTrace merged = merge_traces(inputs);

  std::exponential_distribution<double> service(spec.mu);
  QueueOutput out = run_fifo(
      merged, [&] { return service(service_rng); }, main.flow_id, event_log);
  out.horizon = horizon;
  out.main_after_horizon = main.timestamps.empty()
                               ? 0
                               : out.main_departures.size() -
                                     out.main_departures.count_in(
                                         -std::numeric_limits<double>::infinity(),
                                         horizon);
  return out;
}

std::uint64_t queue_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, index, 0, StreamRole::kQueue);
}

std::vector<QueueOutput> simulate_network(std::span<const PacketTrace> flows,
                                          std::span<const QueueSpec> specs,
                                          std::uint64_t master_seed,
                                          double horizon, ExecPolicy policy) {
  if (flows.size() != specs.size()) {
    throw std::invalid_argument("simulate_network: one queue per flow");
  }
  const auto m = static_cast<std::ptrdiff_t>(flows.size());
  std::vector<QueueOutput> outputs(flows.size());

  if (policy == ExecPolicy::kSerial) {
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      outputs[i] = simulate_queue(flows[i], specs[i],
                                  queue_seed(master_seed, i), horizon);
    }
    return outputs;
  }

  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    try {
      outputs[i] = simulate_queue(flows[i], specs[i],
                                  queue_seed(master_seed, i), horizon);
    } catch (...) {
#pragma omp critical(flowprint_network_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return outputs;
}

void write_event_log_csv(std::ostream& os, std::span<const QueueEvent> log) {
  const auto old = os.precision(17);
  os << "event_type,time,flow_id\n";
  for (const QueueEvent& e : log) {
    const char* kind = e.kind == QueueEventKind::kArrival ? "arrival"
                       : e.kind == QueueEventKind::kServiceStart
                           ? "service_start"
                           : "departure";
    os << kind << ',' << e.time << ',';
    if (e.flow_id == kInterferenceFlow) {
      os << "interference";
    } else {
      os << e.flow_id;
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace flowprint
