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

#include "epdist/latency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epdist {

double link_success_probability(double length_km, const PhysicalParams& p) {
  return p.photon_gen_success * p.photon_gen_success * p.optical_bsm_success *
         std::exp(-length_km / (2.0 * p.attenuation_length_km));
}

double link_attempt_period(double length_km, const PhysicalParams& p) {
  return p.photon_gen_time_s + length_km / p.signal_speed_km_s;
}

double link_latency(double length_km, const PhysicalParams& p) {
  return link_attempt_period(length_km, p) /
         link_success_probability(length_km, p);
}

double swap_latency(double left_s, double right_s, double classical_s,
                    const PhysicalParams& p) {
  return (1.5 * std::max(left_s, right_s) + p.bsm_latency_s + classical_s) /
         p.bsm_success;
}

double stock_swap_latency(double other_s, double classical_s,
                          const PhysicalParams& p) {
  return (other_s + p.bsm_latency_s + classical_s) / p.bsm_success;
}

std::vector<int> SwappingTree::leaf_links() const {
  std::vector<int> out;
  if (vertices_.empty()) return out;
  std::vector<int> stack{0};
  // Explicit in-order walk: push right before left so left pops first.
  while (!stack.empty()) {
    const Vertex& v = vertices_[stack.back()];
    stack.pop_back();
    if (v.is_leaf()) {
      out.push_back(v.lo);
    } else {
      stack.push_back(v.right);
      stack.push_back(v.left);
    }
  }
  return out;
}

std::vector<int> SwappingTree::leaf_depths() const {
  std::vector<int> depth(link_count(), 0);
  if (vertices_.empty()) return depth;
  const int base = root().lo;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [idx, d] = stack.back();
    stack.pop_back();
    const Vertex& v = vertices_[idx];
    if (v.is_leaf()) {
      depth[v.lo - base] = d;
    } else {
      stack.emplace_back(v.left, d + 1);
      stack.emplace_back(v.right, d + 1);
    }
  }
  return depth;
}

SwappingTree optimal_tree(std::span<const double> link_latencies,
                          const SwapDelayFn& delay, const PhysicalParams& p) {
  const int m = static_cast<int>(link_latencies.size());
  if (m < 1) throw std::invalid_argument("optimal_tree: path has no links");
  const int n = m + 1;
  std::vector<double> best(n * n, 0.0);
  std::vector<int> split(n * n, -1);
  auto at = [n](int i, int j) { return i * n + j; };
  for (int i = 0; i < m; ++i) best[at(i, i + 1)] = link_latencies[i];
  for (int span = 2; span <= m; ++span) {
    for (int i = 0; i + span <= m; ++i) {
      const int j = i + span;
      double value = std::numeric_limits<double>::infinity();
      int chosen = -1;
      for (int k = i + 1; k < j; ++k) {
        const double t =
            swap_latency(best[at(i, k)], best[at(k, j)], delay(i, k, j), p);
        if (t < value) {
          value = t;
          chosen = k;
        }
      }
      best[at(i, j)] = value;
      split[at(i, j)] = chosen;
    }
  }

  std::vector<SwappingTree::Vertex> vertices;
  // Pre-order build so the root lands at index 0.
  auto build = [&](auto&& self, int i, int j) -> int {
    const int idx = static_cast<int>(vertices.size());
    vertices.push_back({i, j, split[at(i, j)], -1, -1, best[at(i, j)]});
    if (j - i > 1) {
      const int k = split[at(i, j)];
      const int l = self(self, i, k);
      const int r = self(self, k, j);
      vertices[idx].left = l;
      vertices[idx].right = r;
    }
    return idx;
  };
  build(build, 0, m);
  return SwappingTree(std::move(vertices));
}

SwappingTree optimal_tree(const Path& path, const Topology& topo,
                          const PhysicalParams& p) {
  std::vector<double> links;
  for (std::size_t i = 1; i < path.size(); ++i) {
    links.push_back(link_latency(topo.distance(path[i - 1], path[i]), p));
  }
  auto delay = [&](int i, int k, int j) {
    return p.classical_delay(std::max(topo.distance(path[k], path[i]),
                                      topo.distance(path[k], path[j])));
  };
  return optimal_tree(links, delay, p);
}

double tree_cost(const SwappingTree& tree,
                 std::span<const double> link_success,
                 const PhysicalParams& p) {
  const auto& vs = tree.vertices();
  auto cost = [&](auto&& self, int idx) -> double {
    const auto& v = vs[idx];
    if (v.is_leaf()) return 1.0 / link_success[v.lo];
    return (self(self, v.left) + self(self, v.right)) / p.bsm_success;
  };
  return cost(cost, 0);
}

int expected_stock(const PhysicalParams& p) {
  const double raw = 1.0 / (p.bsm_success * p.bsm_success);
  return static_cast<int>(std::ceil(raw - 1e-9));
}

SuperLink make_super_link(Path path, const Topology& topo,
                          const PhysicalParams& p) {
  validate_path(topo, path);
  SuperLink sl;
  sl.a = path.front();
  sl.b = path.back();
  sl.tree = optimal_tree(path, topo, p);
  sl.path = std::move(path);
  sl.ep_latency_s = sl.tree.latency();
  sl.cost = sl_cost(sl, topo, p);
  sl.stock_target = expected_stock(p);
  return sl;
}

double sl_cost(const SuperLink& sl, const Topology& topo,
               const PhysicalParams& p) {
  std::vector<double> success;
  for (std::size_t i = 1; i < sl.path.size(); ++i) {
    success.push_back(
        link_success_probability(topo.distance(sl.path[i - 1], sl.path[i]), p));
  }
  return tree_cost(sl.tree, success, p);
}

std::string_view shape_name(Shape shape) {
  switch (shape) {
    case Shape::kDirect: return "direct";
    case Shape::kStock: return "stock";
    case Shape::kSourceFirst: return "source_first";
    case Shape::kDestFirst: return "dest_first";
  }
  return "direct";
}

Shape parse_shape(std::string_view name) {
  for (Shape s : {Shape::kDirect, Shape::kStock, Shape::kSourceFirst,
                  Shape::kDestFirst}) {
    if (shape_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown tree shape '" + std::string(name) + "'");
}

double source_first_latency(std::optional<double> source_to_near,
                            std::optional<double> far_to_dest,
                            SwapDelays delays, const PhysicalParams& p) {
  if (!source_to_near && !far_to_dest) return 0.0;
  if (!source_to_near) return stock_swap_latency(*far_to_dest, delays.far_s, p);
  const double to_far = stock_swap_latency(*source_to_near, delays.near_s, p);
  if (!far_to_dest) return to_far;
  return swap_latency(to_far, *far_to_dest, delays.far_s, p);
}

double dest_first_latency(std::optional<double> source_to_near,
                          std::optional<double> far_to_dest,
                          SwapDelays delays, const PhysicalParams& p) {
  if (!source_to_near && !far_to_dest) return 0.0;
  if (!far_to_dest) return stock_swap_latency(*source_to_near, delays.near_s, p);
  const double from_near = stock_swap_latency(*far_to_dest, delays.far_s, p);
  if (!source_to_near) return from_near;
  return swap_latency(*source_to_near, from_near, delays.near_s, p);
}

SlRoute best_sl_route(NodeId s, NodeId d, NodeId a, NodeId b,
                      const ConnectorFn& connector, const Topology& topo,
                      const PhysicalParams& p) {
  SlRoute best;
  auto dist = [&](NodeId x, NodeId y) { return topo.distance(x, y); };
  for (auto [near, far] : {std::pair{a, b}, std::pair{b, a}}) {
    std::optional<double> t_near, t_far;
    if (s != near) {
      const Latency l = connector(s, near);
      if (!l.reachable()) continue;
      t_near = l.seconds();
    }
    if (d != far) {
      const Latency l = connector(far, d);
      if (!l.reachable()) continue;
      t_far = l.seconds();
    }
    if (!t_near && !t_far) {
      return SlRoute{Latency::of(0.0), Shape::kStock, near, far, {}, {}};
    }
    // Each swap's classical delay reaches the farther of the two endpoints
    // it joins.
    const SwapDelays src_first{
        p.classical_delay(std::max(dist(near, s), dist(near, far))),
        p.classical_delay(std::max(dist(far, s), dist(far, d)))};
    const SwapDelays dst_first{
        p.classical_delay(std::max(dist(near, s), dist(near, d))),
        p.classical_delay(std::max(dist(far, near), dist(far, d)))};
    const double l_src = source_first_latency(t_near, t_far, src_first, p);
    const double l_dst = dest_first_latency(t_near, t_far, dst_first, p);
    const bool dst_wins = l_dst < l_src;
    const Latency value = Latency::of(dst_wins ? l_dst : l_src);
    if (value < best.latency) {
      best.latency = value;
      best.shape = dst_wins ? Shape::kDestFirst : Shape::kSourceFirst;
      best.near = near;
      best.far = far;
    }
  }
  return best;
}

Latency direct_latency(NodeId s, NodeId d, const Topology& topo,
                       const PhysicalParams& p) {
  if (s == d) return Latency::of(0.0);
  const auto path = shortest_path(topo, s, d);
  if (!path) return Latency::unreachable();
  return Latency::of(optimal_tree(*path, topo, p).latency());
}

SlRoute sl_aided_latency(NodeId s, NodeId d, const SuperLink& sl,
                         const Topology& topo, const PhysicalParams& p) {
  auto connector = [&](NodeId u, NodeId v) {
    return direct_latency(u, v, topo, p);
  };
  SlRoute route = best_sl_route(s, d, sl.a, sl.b, connector, topo, p);
  if (route.latency.reachable()) {
    if (s != route.near) route.to_sl = *shortest_path(topo, s, route.near);
    if (d != route.far) route.from_sl = *shortest_path(topo, route.far, d);
  }
  return route;
}

PsiResult psi(const RequestSet& requests, std::span<const SuperLink> sls,
              const Topology& topo, const PhysicalParams& p) {
  PsiResult result;
  for (const RequestPair& rq : requests.pairs()) {
    AssignmentEntry entry;
    entry.s = rq.s;
    entry.d = rq.d;
    entry.latency = direct_latency(rq.s, rq.d, topo, p);
    for (std::size_t i = 0; i < sls.size(); ++i) {
      SlRoute route = sl_aided_latency(rq.s, rq.d, sls[i], topo, p);
      if (route.latency < entry.latency) {
        entry.sl = static_cast<int>(i);
        entry.shape = route.shape;
        entry.near = route.near;
        entry.far = route.far;
        entry.to_sl = std::move(route.to_sl);
        entry.from_sl = std::move(route.from_sl);
        entry.latency = route.latency;
      }
    }
    result.value += rq.weight * entry.latency.or_infinity();
    result.assignment.push_back(std::move(entry));
  }
  return result;
}

}  // namespace epdist
