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

#include <optional>
#include <span>
#include <vector>

#include "epdist/topology.hpp"

namespace epdist {

// Ordered node sequence; consecutive nodes are adjacent.
using Path = std::vector<NodeId>;

// Single-source shortest paths minimizing hop count, ties broken by total
// length in km.
struct PathTree {
  NodeId source = 0;
  std::vector<int> hops;  // -1 when unreachable
  std::vector<double> length_km;
  std::vector<NodeId> parent;

  bool reachable(NodeId v) const { return hops[v] >= 0; }
  // Path from `source` to `v`; empty if unreachable.
  Path path_to(NodeId v) const;
};

// `blocked[v] != 0` removes node v (and its incident edges) from the search.
// The source itself must not be blocked.
PathTree shortest_path_tree(const Topology& topo, NodeId source,
                            std::span<const char> blocked = {});

// Path from s to d. The search always runs from min(s, d), so the u-v and
// v-u paths are reverses of each other.
std::optional<Path> shortest_path(const Topology& topo, NodeId s, NodeId d,
                                  std::span<const char> blocked = {});

// Throws std::invalid_argument unless `path` has >= 2 nodes, is simple, and
// every hop is an edge of `topo`.
void validate_path(const Topology& topo, const Path& path);

bool paths_intersect(const Path& a, const Path& b);

double path_length_km(const Topology& topo, const Path& path);

}  // namespace epdist
