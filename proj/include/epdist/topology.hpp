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

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "epdist/params.hpp"

namespace epdist {

// Dense node index in [0, node_count).
using NodeId = int;

struct Node {
  NodeId id = 0;
  double x_km = 0.0;
  double y_km = 0.0;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double length_km = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct TopologyMeta {
  std::uint64_t seed = 0;
  double density = 0.0;  // target density requested at generation time

  friend bool operator==(const TopologyMeta&, const TopologyMeta&) = default;
};

struct Neighbor {
  NodeId node;
  int edge;  // index into Topology::edges()
};

// Undirected, connected quantum network with planar node coordinates.
//
// The constructor enforces every structural invariant: dense ids, no
// self-loops or duplicate edges, edge lengths equal to the Euclidean distance
// of their endpoints (and within `max_link_km`), and connectivity. Violations
// throw ParseError with the offending element named.
class Topology {
 public:
  Topology(std::vector<Node> nodes, std::vector<Edge> edges,
           TopologyMeta meta = {},
           double max_link_km = std::numeric_limits<double>::infinity());

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const TopologyMeta& meta() const { return meta_; }
  std::span<const Neighbor> neighbors(NodeId u) const { return adjacency_[u]; }

  // Euclidean distance between two nodes.
  double distance(NodeId a, NodeId b) const;
  std::optional<int> edge_between(NodeId a, NodeId b) const;
  // Fraction of the complete graph present as edges.
  double density() const;
  double mean_degree() const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.meta_ == b.meta_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  TopologyMeta meta_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct RequestPair {
  NodeId s = 0;
  NodeId d = 0;
  double weight = 0.0;

  friend bool operator==(const RequestPair&, const RequestPair&) = default;
};

// Expected EP request pairs. Weights are normalized to sum to one.
class RequestSet {
 public:
  RequestSet() = default;
  // Throws std::invalid_argument on s == d or non-positive weights.
  explicit RequestSet(std::vector<RequestPair> pairs);

  const std::vector<RequestPair>& pairs() const { return pairs_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  bool empty() const { return pairs_.empty(); }
  const RequestPair& operator[](int i) const { return pairs_[i]; }

  // Checks ids exist in `topo` and, when given, the s-d distance range.
  void validate(const Topology& topo, double min_km = 0.0,
                double max_km =
                    std::numeric_limits<double>::infinity()) const;

  friend bool operator==(const RequestSet&, const RequestSet&) = default;

 private:
  std::vector<RequestPair> pairs_;
};

struct WaxmanOptions {
  int nodes = 100;
  double width_km = 100.0;
  double height_km = 100.0;
  double max_link_km = 30.0;
  double density = 0.08;
  std::uint64_t seed = 1;
  double beta = 0.6;
  int max_retries = 100;
  double tolerance = 0.10;  // relative edge-count tolerance
};

// Waxman random geometric graph with edge probability
// beta * exp(-d / (alpha * max_link_km)) restricted to d <= max_link_km.
// alpha is bisected so that the expected edge count hits the target density.
// Layouts that are disconnected or miss the tolerance are redrawn with an
// incremented seed. Throws InfeasibleError after `max_retries` attempts.
Topology gen_waxman(const WaxmanOptions& options);

// Samples `count` distinct unordered pairs uniformly among those whose
// Euclidean distance lies in [min_km, max_km]. Throws InfeasibleError naming
// the achievable distance span when too few pairs qualify.
RequestSet gen_requests(const Topology& topo, int count, double min_km,
                        double max_km, std::uint64_t seed);

void save_topology(const Topology& topo, const std::filesystem::path& path);
Topology load_topology(const std::filesystem::path& path);
void save_requests(const RequestSet& requests,
                   const std::filesystem::path& path);
RequestSet load_requests(const std::filesystem::path& path);

}  // namespace epdist
