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

// Analytic latency model: link EP generation, swapping trees, super-link
// aided request trees, super-link cost, and the aggregate objective.

#pragma once

#include <compare>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "epdist/params.hpp"
#include "epdist/paths.hpp"
#include "epdist/topology.hpp"

namespace epdist {

// Expected generation latency in seconds, or the explicit "unreachable"
// state. Unreachable orders after every finite latency.
class Latency {
 public:
  static constexpr Latency unreachable() { return Latency(); }
  static constexpr Latency of(double seconds) { return Latency(seconds); }

  constexpr bool reachable() const { return reachable_; }
  double seconds() const {
    if (!reachable_) throw std::logic_error("latency is unreachable");
    return seconds_;
  }
  // For arithmetic contexts that tolerate +inf (ranking, sums).
  constexpr double or_infinity() const {
    return reachable_ ? seconds_ : std::numeric_limits<double>::infinity();
  }

  friend constexpr std::partial_ordering operator<=>(const Latency& a,
                                                     const Latency& b) {
    if (a.reachable_ != b.reachable_) {
      return a.reachable_ ? std::partial_ordering::less
                          : std::partial_ordering::greater;
    }
    if (!a.reachable_) return std::partial_ordering::equivalent;
    return a.seconds_ <=> b.seconds_;
  }
  friend constexpr bool operator==(const Latency& a, const Latency& b) {
    return (a <=> b) == 0;
  }

 private:
  constexpr Latency() = default;
  constexpr explicit Latency(double s) : reachable_(true), seconds_(s) {}

  bool reachable_ = false;
  double seconds_ = 0.0;
};

// Heralded link generation: each round takes the atom-photon generation time
// plus the photon flight to the midpoint and the herald back; it succeeds
// with g_p^2 * p_op * exp(-d / (2 L_att)).
double link_success_probability(double length_km, const PhysicalParams& p);
double link_attempt_period(double length_km, const PhysicalParams& p);
// attempt period / success probability.
double link_latency(double length_km, const PhysicalParams& p);

// Swap over two independently generated children:
// (3/2 * max(left, right) + t_b + classical) / p_b.
double swap_latency(double left_s, double right_s, double classical_s,
                    const PhysicalParams& p);
// Swap whose other child is drawn from a ready stock:
// (other + t_b + classical) / p_b.
double stock_swap_latency(double other_s, double classical_s,
                          const PhysicalParams& p);

// Binary swapping tree over the links of a path with m links. Vertex
// (lo, hi) spans path nodes lo..hi; leaves have hi == lo + 1 and stand for
// link lo. Vertex 0 is the root.
class SwappingTree {
 public:
  struct Vertex {
    int lo = 0;
    int hi = 1;
    int split = -1;  // swapping path index; -1 for leaves
    int left = -1;
    int right = -1;
    double latency_s = 0.0;

    bool is_leaf() const { return split < 0; }
  };

  SwappingTree() = default;
  explicit SwappingTree(std::vector<Vertex> vertices)
      : vertices_(std::move(vertices)) {}

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const Vertex& root() const { return vertices_.front(); }
  double latency() const { return root().latency_s; }
  int link_count() const { return root().hi - root().lo; }
  // Leaf link indices in in-order traversal.
  std::vector<int> leaf_links() const;
  // Number of swaps between each leaf link and the root, per link index.
  std::vector<int> leaf_depths() const;

 private:
  std::vector<Vertex> vertices_;
};

// Classical delay of the swap at path index `split` joining `lo` and `hi`.
using SwapDelayFn = std::function<double(int lo, int split, int hi)>;

// Interval DP: T[i][i+1] = link latency, T[i][j] = min over k of
// swap_latency(T[i][k], T[k][j], delay(i, k, j)). Ties pick the smallest k.
SwappingTree optimal_tree(std::span<const double> link_latencies,
                          const SwapDelayFn& delay, const PhysicalParams& p);
// Over a concrete path, with delay = max(dist(x_k, x_i), dist(x_k, x_j))
// / c_sig (or the fixed override).
SwappingTree optimal_tree(const Path& path, const Topology& topo,
                          const PhysicalParams& p);

// Expected link-level generation attempts per root EP: leaves cost
// 1 / P_link, internal vertices (cost(left) + cost(right)) / p_b.
double tree_cost(const SwappingTree& tree,
                 std::span<const double> link_success,
                 const PhysicalParams& p);

// ceil(1 / p_b^2): EPs kept in stock at every super-link.
int expected_stock(const PhysicalParams& p);

// A node pair whose EPs are generated continuously over `path` with `tree`.
struct SuperLink {
  NodeId a = 0;
  NodeId b = 0;
  Path path;
  SwappingTree tree;
  double ep_latency_s = 0.0;
  double cost = 0.0;  // expected link attempts per EP
  int stock_target = 0;

  // stock_target * ep_latency < slot length.
  bool replenishes_within_slot(const PhysicalParams& p) const {
    return stock_target * ep_latency_s < p.slot_s;
  }
};

// Builds the optimal tree, cost, and stock target for `path`.
SuperLink make_super_link(Path path, const Topology& topo,
                          const PhysicalParams& p);

// Recomputes the cost of `sl` from its tree and link lengths.
double sl_cost(const SuperLink& sl, const Topology& topo,
               const PhysicalParams& p);

// How a request tree is built around its super-link. `kSourceFirst` merges
// the stocked EP with the source-side connector first; `kDestFirst` merges it
// with the destination side first. `kStock` is a request that coincides with
// the super-link itself.
enum class Shape { kDirect, kStock, kSourceFirst, kDestFirst };

std::string_view shape_name(Shape shape);
Shape parse_shape(std::string_view name);

// Classical delays of the swaps at the super-link endpoint nearest the
// source and the one nearest the destination.
struct SwapDelays {
  double near_s = 0.0;
  double far_s = 0.0;
};

// Request latency when the stocked EP is merged with the source side first.
// An absent connector latency means the request endpoint coincides with the
// super-link endpoint; that swap level is skipped.
double source_first_latency(std::optional<double> source_to_near,
                            std::optional<double> far_to_dest,
                            SwapDelays delays, const PhysicalParams& p);
double dest_first_latency(std::optional<double> source_to_near,
                          std::optional<double> far_to_dest,
                          SwapDelays delays, const PhysicalParams& p);

struct SlRoute {
  Latency latency = Latency::unreachable();
  Shape shape = Shape::kSourceFirst;
  NodeId near = -1;  // super-link endpoint joined to the source
  NodeId far = -1;   // super-link endpoint joined to the destination
  Path to_sl;        // s -> near; empty when s == near
  Path from_sl;      // far -> d; empty when far == d
};

// Connector latencies come from `connector(u, v)`; both endpoint labelings
// and both shapes are tried and the minimum kept.
using ConnectorFn = std::function<Latency(NodeId, NodeId)>;
SlRoute best_sl_route(NodeId s, NodeId d, NodeId a, NodeId b,
                      const ConnectorFn& connector, const Topology& topo,
                      const PhysicalParams& p);

// Latency of the best request tree through super-link `sl`.
SlRoute sl_aided_latency(NodeId s, NodeId d, const SuperLink& sl,
                         const Topology& topo, const PhysicalParams& p);

// Optimal tree latency over the hop-shortest s-d path.
Latency direct_latency(NodeId s, NodeId d, const Topology& topo,
                       const PhysicalParams& p);

struct AssignmentEntry {
  NodeId s = 0;
  NodeId d = 0;
  int sl = -1;  // index into the super-link set; -1 for direct
  Shape shape = Shape::kDirect;
  NodeId near = -1;
  NodeId far = -1;
  Path to_sl;
  Path from_sl;
  Latency latency = Latency::unreachable();
};

struct PsiResult {
  double value = 0.0;  // weighted mean latency, seconds
  std::vector<AssignmentEntry> assignment;
};

// Weighted sum over requests of min(direct, min over sls of sl-aided).
// Ties keep direct, then the lowest super-link index.
PsiResult psi(const RequestSet& requests, std::span<const SuperLink> sls,
              const Topology& topo, const PhysicalParams& p);

}  // namespace epdist
