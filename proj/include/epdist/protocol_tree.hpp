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

#include <span>
#include <vector>

#include "epdist/latency.hpp"

namespace epdist {

// Executable form of a swapping tree. Leaves are either physical links or a
// super-link stock; every internal vertex is a swap at `swap_at` joining an
// EP (left_end, swap_at) with an EP (swap_at, right_end).
struct ProtocolVertex {
  enum class Kind { kLink, kStock, kSwap };

  Kind kind = Kind::kLink;
  NodeId left_end = 0;
  NodeId right_end = 0;
  int edge = -1;  // kLink: edge index in the topology
  int sl = -1;    // kStock: super-link index in the plan
  NodeId swap_at = -1;
  int left = -1;
  int right = -1;
};

class ProtocolTree {
 public:
  ProtocolTree() = default;

  static ProtocolTree link(const Topology& topo, NodeId u, NodeId v);
  static ProtocolTree stock(int sl, NodeId a, NodeId b);
  static ProtocolTree from_swapping_tree(const Path& path,
                                         const SwappingTree& tree,
                                         const Topology& topo);
  // Swap at the shared endpoint of `left` (x, at) and `right` (at, y).
  static ProtocolTree join(const ProtocolTree& left, const ProtocolTree& right);

  const std::vector<ProtocolVertex>& vertices() const { return vertices_; }
  const ProtocolVertex& vertex(int i) const { return vertices_[i]; }
  int root() const { return root_; }
  int parent(int i) const { return parent_[i]; }
  NodeId left_end() const { return vertices_[root_].left_end; }
  NodeId right_end() const { return vertices_[root_].right_end; }

  // Analytic expected latency: link leaves use link_latency, stock leaves
  // are instantly available, swaps use swap_latency (or stock_swap_latency
  // when one child is a stock leaf).
  double expected_latency(const Topology& topo, const PhysicalParams& p) const;

  // Classical delay charged after the swap at vertex `i`.
  double swap_delay(int i, const Topology& topo, const PhysicalParams& p) const;

  // Distinct topology nodes touched by the tree.
  std::vector<NodeId> nodes() const;

 private:
  int append(const ProtocolTree& other);

  std::vector<ProtocolVertex> vertices_;
  std::vector<int> parent_;
  int root_ = -1;
};

// Tree used to serve request `entry` under `sls` (direct or super-link
// aided, with the connectors and shape recorded in the entry).
ProtocolTree request_tree(const AssignmentEntry& entry,
                          std::span<const SuperLink> sls, const Topology& topo,
                          const PhysicalParams& p);

}  // namespace epdist
