// Copyright 2026 The epdist Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Discrete-event simulation of the waiting swap protocol: heralded link
// generation, BSMs with success/failure notification, continuous super-link
// replenishment into bounded stocks, pausing of intersecting super-links, and
// one request per slot.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "epdist/protocol_tree.hpp"
#include "epdist/selection.hpp"

namespace epdist {

struct RequestRecord {
  int slot = 0;
  int request = 0;        // index into the request set
  double latency_s = 0.0; // slot length on timeout
  bool timeout = false;
  int sl = -1;            // super-link used, -1 for direct
  int sl_eps_consumed = 0;
  int stock_swaps = 0;    // swap levels between the stock leaf and the root

  friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

// Super-link EP bookkeeping. Every EP that enters a stock (including the
// initial fill) is either taken by a request tree, expires in stock, or is
// still in stock at the end.
struct EpAccounting {
  std::uint64_t produced = 0;
  std::uint64_t taken = 0;
  std::uint64_t expired = 0;
  std::uint64_t in_stock_end = 0;

  bool balanced() const { return produced == taken + expired + in_stock_end; }
  friend bool operator==(const EpAccounting&, const EpAccounting&) = default;
};

struct SimMetrics {
  std::vector<RequestRecord> records;  // one per slot
  std::vector<double> latencies_s;     // one per slot, timeouts included
  int served = 0;
  int timeouts = 0;
  double avg_latency_s = 0.0;
  double max_latency_s = 0.0;
  // Sum over super-links of their mean simulated EP generation time
  // (restart to root EP). Super-links that never regenerated contribute 0.
  double sl_aggregate_latency_s = 0.0;
  std::vector<double> sl_mean_cycle_s;    // per super-link, 0 when none
  std::vector<std::uint64_t> sl_cycles;   // EPs generated per super-link
  double mean_sl_eps_consumed = 0.0;      // over served SL-aided requests
  std::uint64_t link_attempts = 0;
  std::uint64_t tree_eps_expired = 0;     // in-tree EPs dropped by the ttl
  EpAccounting eps;
  std::uint64_t pause_violations = 0;
  std::uint64_t events = 0;

  friend bool operator==(const SimMetrics&, const SimMetrics&) = default;
};

// Runs n_slots slots of params.slot_s. Throws std::invalid_argument when the
// plan does not fit the topology or the requests, or n_slots < 1. When
// `trace` is set, writes one JSON object per processed event.
SimMetrics simulate(const Topology& topo, const Plan& plan,
                    const RequestSet& requests, const PhysicalParams& params,
                    int n_slots, std::uint64_t seed,
                    std::ostream* trace = nullptr);

struct McEstimate {
  double mean_s = 0.0;
  double stderr_s = 0.0;
  double mean_link_attempts = 0.0;  // per delivered root EP
  int trials = 0;
};

// Repeated isolated runs of one tree; stock leaves never run dry.
McEstimate mc_tree_latency(const ProtocolTree& tree, const Topology& topo,
                           const PhysicalParams& params, int trials,
                           std::uint64_t seed);
McEstimate mc_tree_latency(const Path& path, const SwappingTree& tree,
                           const Topology& topo, const PhysicalParams& params,
                           int trials, std::uint64_t seed);

void save_metrics(const SimMetrics& metrics, const std::filesystem::path& path);

}  // namespace epdist
