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

#include "epdist/paths.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <tuple>
#include <unordered_set>

#include <fmt/format.h>

namespace epdist {

Path PathTree::path_to(NodeId v) const {
  if (!reachable(v)) return {};
  Path p;
  for (NodeId x = v; x != -1; x = parent[x]) p.push_back(x);
  std::reverse(p.begin(), p.end());
  return p;
}

PathTree shortest_path_tree(const Topology& topo, NodeId source,
                            std::span<const char> blocked) {
  const int n = topo.node_count();
  PathTree tree;
  tree.source = source;
  tree.hops.assign(n, -1);
  tree.length_km.assign(n, 0.0);
  tree.parent.assign(n, -1);
  auto is_blocked = [&](NodeId v) {
    return !blocked.empty() && blocked[v] != 0;
  };
  if (is_blocked(source)) return tree;

  using Key = std::tuple<int, double, NodeId>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> frontier;
  std::vector<char> done(n, 0);
  tree.hops[source] = 0;
  frontier.emplace(0, 0.0, source);
  while (!frontier.empty()) {
    auto [h, len, u] = frontier.top();
    frontier.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (const Neighbor& nb : topo.neighbors(u)) {
      const NodeId v = nb.node;
      if (done[v] || is_blocked(v)) continue;
      const int nh = h + 1;
      const double nl = len + topo.edges()[nb.edge].length_km;
      if (tree.hops[v] < 0 || std::tie(nh, nl) < std::tie(tree.hops[v],
                                                           tree.length_km[v])) {
        tree.hops[v] = nh;
        tree.length_km[v] = nl;
        tree.parent[v] = u;
        frontier.emplace(nh, nl, v);
      }
    }
  }
  return tree;
}

std::optional<Path> shortest_path(const Topology& topo, NodeId s, NodeId d,
                                  std::span<const char> blocked) {
  const NodeId lo = std::min(s, d), hi = std::max(s, d);
  if (!blocked.empty() && (blocked[lo] || blocked[hi])) return std::nullopt;
  const PathTree tree = shortest_path_tree(topo, lo, blocked);
  if (!tree.reachable(hi)) return std::nullopt;
  Path p = tree.path_to(hi);
  if (s > d) std::reverse(p.begin(), p.end());
  return p;
}

void validate_path(const Topology& topo, const Path& path) {
  if (path.size() < 2) {
    throw std::invalid_argument("path needs at least two nodes");
  }
  std::unordered_set<NodeId> seen;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const NodeId v = path[i];
    if (v < 0 || v >= topo.node_count()) {
      throw std::invalid_argument(fmt::format("path: unknown node id {}", v));
    }
    if (!seen.insert(v).second) {
      throw std::invalid_argument(fmt::format("path: node {} repeats", v));
    }
    if (i > 0 && !topo.edge_between(path[i - 1], v)) {
      throw std::invalid_argument(
          fmt::format("path: no edge {}-{}", path[i - 1], v));
    }
  }
}

bool paths_intersect(const Path& a, const Path& b) {
  for (NodeId x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  }
  return false;
}

double path_length_km(const Topology& topo, const Path& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    total += topo.distance(path[i - 1], path[i]);
  }
  return total;
}

}  // namespace epdist
