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

#pragma once

#include <vector>

#include "epdist/latency.hpp"

namespace epdist {

// All-pairs cache of hop-shortest paths and direct latencies. Produces the
// same values as direct_latency / sl_aided_latency without re-running the
// path search. Read-only after construction; safe to share across threads.
// Holds a reference to `topo`, which must outlive the table.
class LatencyTable {
 public:
  LatencyTable(const Topology& topo, const PhysicalParams& params);

  const Topology& topology() const { return *topo_; }
  const PhysicalParams& params() const { return params_; }
  int node_count() const { return n_; }

  // Hop-shortest u -> v path; empty when unreachable.
  Path path(NodeId u, NodeId v) const;
  Latency direct(NodeId u, NodeId v) const {
    const double t = direct_[u * n_ + v];
    return t < kUnreachable ? Latency::of(t) : Latency::unreachable();
  }
  // Best super-link aided route for (s, d) through endpoints (a, b).
  SlRoute route(NodeId s, NodeId d, NodeId a, NodeId b) const;
  // route(...).latency as a plain number, +inf when unreachable.
  double via(NodeId s, NodeId d, NodeId a, NodeId b) const;

  // Super-link over the hop-shortest a-b path.
  SuperLink super_link(NodeId a, NodeId b) const;

 private:
  static constexpr double kUnreachable = std::numeric_limits<double>::max();

  const Topology* topo_;
  PhysicalParams params_;
  int n_;
  std::vector<PathTree> trees_;
  std::vector<double> direct_;
};

}  // namespace epdist
