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

#include "epdist/latency_table.hpp"

#include <algorithm>

namespace epdist {

LatencyTable::LatencyTable(const Topology& topo, const PhysicalParams& params)
    : topo_(&topo), params_(params), n_(topo.node_count()) {
  params_.validate();
  trees_.reserve(n_);
  for (NodeId u = 0; u < n_; ++u) trees_.push_back(shortest_path_tree(topo, u));
  direct_.assign(static_cast<std::size_t>(n_) * n_, kUnreachable);
  for (NodeId u = 0; u < n_; ++u) {
    direct_[u * n_ + u] = 0.0;
    for (NodeId v = u + 1; v < n_; ++v) {
      if (!trees_[u].reachable(v)) continue;
      const double t = optimal_tree(trees_[u].path_to(v), topo, params_).latency();
      direct_[u * n_ + v] = t;
      direct_[v * n_ + u] = t;
    }
  }
}

Path LatencyTable::path(NodeId u, NodeId v) const {
  const NodeId lo = std::min(u, v), hi = std::max(u, v);
  Path p = trees_[lo].path_to(hi);
  if (u > v) std::reverse(p.begin(), p.end());
  return p;
}

SlRoute LatencyTable::route(NodeId s, NodeId d, NodeId a, NodeId b) const {
  auto connector = [this](NodeId u, NodeId v) { return direct(u, v); };
  SlRoute r = best_sl_route(s, d, a, b, connector, *topo_, params_);
  if (r.latency.reachable()) {
    if (s != r.near) r.to_sl = path(s, r.near);
    if (d != r.far) r.from_sl = path(r.far, d);
  }
  return r;
}

double LatencyTable::via(NodeId s, NodeId d, NodeId a, NodeId b) const {
  auto connector = [this](NodeId u, NodeId v) { return direct(u, v); };
  return best_sl_route(s, d, a, b, connector, *topo_, params_)
      .latency.or_infinity();
}

SuperLink LatencyTable::super_link(NodeId a, NodeId b) const {
  return make_super_link(path(a, b), *topo_, params_);
}

}  // namespace epdist
