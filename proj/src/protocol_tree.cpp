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

#include "epdist/protocol_tree.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace epdist {

ProtocolTree ProtocolTree::link(const Topology& topo, NodeId u, NodeId v) {
  const auto edge = topo.edge_between(u, v);
  if (!edge) throw std::invalid_argument(fmt::format("no edge {}-{}", u, v));
  ProtocolTree t;
  ProtocolVertex leaf;
  leaf.kind = ProtocolVertex::Kind::kLink;
  leaf.left_end = u;
  leaf.right_end = v;
  leaf.edge = *edge;
  t.vertices_.push_back(leaf);
  t.parent_.push_back(-1);
  t.root_ = 0;
  return t;
}

ProtocolTree ProtocolTree::stock(int sl, NodeId a, NodeId b) {
  ProtocolTree t;
  ProtocolVertex leaf;
  leaf.kind = ProtocolVertex::Kind::kStock;
  leaf.left_end = a;
  leaf.right_end = b;
  leaf.sl = sl;
  t.vertices_.push_back(leaf);
  t.parent_.push_back(-1);
  t.root_ = 0;
  return t;
}

int ProtocolTree::append(const ProtocolTree& other) {
  const int offset = static_cast<int>(vertices_.size());
  for (std::size_t i = 0; i < other.vertices_.size(); ++i) {
    ProtocolVertex v = other.vertices_[i];
    if (v.left >= 0) v.left += offset;
    if (v.right >= 0) v.right += offset;
    vertices_.push_back(v);
    parent_.push_back(other.parent_[i] >= 0 ? other.parent_[i] + offset : -1);
  }
  return other.root_ + offset;
}

ProtocolTree ProtocolTree::join(const ProtocolTree& left,
                                const ProtocolTree& right) {
  if (left.right_end() != right.left_end()) {
    throw std::invalid_argument(fmt::format(
        "cannot swap EP ({}, {}) with EP ({}, {})", left.left_end(),
        left.right_end(), right.left_end(), right.right_end()));
  }
  ProtocolTree t;
  const int l = t.append(left);
  const int r = t.append(right);
  ProtocolVertex swap;
  swap.kind = ProtocolVertex::Kind::kSwap;
  swap.left_end = left.left_end();
  swap.right_end = right.right_end();
  swap.swap_at = left.right_end();
  swap.left = l;
  swap.right = r;
  t.root_ = static_cast<int>(t.vertices_.size());
  t.vertices_.push_back(swap);
  t.parent_.push_back(-1);
  t.parent_[l] = t.root_;
  t.parent_[r] = t.root_;
  return t;
}

ProtocolTree ProtocolTree::from_swapping_tree(const Path& path,
                                              const SwappingTree& tree,
                                              const Topology& topo) {
  const auto& vs = tree.vertices();
  auto build = [&](auto&& self, int idx) -> ProtocolTree {
    const auto& v = vs[idx];
    if (v.is_leaf()) return link(topo, path[v.lo], path[v.hi]);
    return join(self(self, v.left), self(self, v.right));
  };
  return build(build, 0);
}

double ProtocolTree::swap_delay(int i, const Topology& topo,
                                const PhysicalParams& p) const {
  const ProtocolVertex& v = vertices_[i];
  return p.classical_delay(std::max(topo.distance(v.swap_at, v.left_end),
                                    topo.distance(v.swap_at, v.right_end)));
}

double ProtocolTree::expected_latency(const Topology& topo,
                                      const PhysicalParams& p) const {
  using Kind = ProtocolVertex::Kind;
  auto eval = [&](auto&& self, int idx) -> double {
    const ProtocolVertex& v = vertices_[idx];
    switch (v.kind) {
      case Kind::kLink:
        return link_latency(topo.edges()[v.edge].length_km, p);
      case Kind::kStock:
        return 0.0;
      case Kind::kSwap: {
        const double tc = swap_delay(idx, topo, p);
        const bool left_stock = vertices_[v.left].kind == Kind::kStock;
        const bool right_stock = vertices_[v.right].kind == Kind::kStock;
        if (left_stock) return stock_swap_latency(self(self, v.right), tc, p);
        if (right_stock) return stock_swap_latency(self(self, v.left), tc, p);
        return swap_latency(self(self, v.left), self(self, v.right), tc, p);
      }
    }
    return 0.0;
  };
  return eval(eval, root_);
}

std::vector<NodeId> ProtocolTree::nodes() const {
  std::set<NodeId> out;
  for (const ProtocolVertex& v : vertices_) {
    out.insert(v.left_end);
    out.insert(v.right_end);
  }
  return {out.begin(), out.end()};
}

ProtocolTree request_tree(const AssignmentEntry& entry,
                          std::span<const SuperLink> sls, const Topology& topo,
                          const PhysicalParams& p) {
  auto over = [&](const Path& path) {
    return ProtocolTree::from_swapping_tree(path, optimal_tree(path, topo, p),
                                            topo);
  };
  if (entry.sl < 0 || entry.shape == Shape::kDirect) {
    const auto path = shortest_path(topo, entry.s, entry.d);
    if (!path) {
      throw std::invalid_argument(
          fmt::format("request {}-{} is unreachable", entry.s, entry.d));
    }
    return over(*path);
  }
  if (entry.sl >= static_cast<int>(sls.size())) {
    throw std::invalid_argument(
        fmt::format("assignment references super-link {}", entry.sl));
  }
  ProtocolTree tree = ProtocolTree::stock(entry.sl, entry.near, entry.far);
  const bool has_source = !entry.to_sl.empty();
  const bool has_dest = !entry.from_sl.empty();
  if (entry.shape == Shape::kDestFirst) {
    if (has_dest) tree = ProtocolTree::join(tree, over(entry.from_sl));
    if (has_source) tree = ProtocolTree::join(over(entry.to_sl), tree);
  } else {
    if (has_source) tree = ProtocolTree::join(over(entry.to_sl), tree);
    if (has_dest) tree = ProtocolTree::join(tree, over(entry.from_sl));
  }
  return tree;
}

}  // namespace epdist
