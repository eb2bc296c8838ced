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

#include "epdist/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "epdist/random.hpp"
#include "json_util.hpp"

namespace epdist {
namespace {

constexpr std::uint64_t kWaxmanStream = 0x7761786d616eULL;
constexpr std::uint64_t kRequestStream = 0x72657175657374ULL;

double euclid(const Node& a, const Node& b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

bool connected(int n, const std::vector<Edge>& edges) {
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = n;
  for (const Edge& e : edges) {
    int a = find(e.u), b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace

Topology::Topology(std::vector<Node> nodes, std::vector<Edge> edges,
                   TopologyMeta meta, double max_link_km)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), meta_(meta) {
  const int n = node_count();
  if (n < 1) throw std::invalid_argument("topology has no nodes");
  for (int i = 0; i < n; ++i) {
    if (nodes_[i].id != i) {
      throw std::invalid_argument(
          fmt::format("nodes[{}]: id {} breaks dense numbering", i,
                      nodes_[i].id));
    }
  }
  adjacency_.assign(n, {});
  std::set<std::pair<NodeId, NodeId>> seen;
  for (int i = 0; i < edge_count(); ++i) {
    const Edge& e = edges_[i];
    for (NodeId end : {e.u, e.v}) {
      if (end < 0 || end >= n) {
        throw std::invalid_argument(
            fmt::format("edges[{}]: unknown node id {}", i, end));
      }
    }
    if (e.u == e.v) {
      throw std::invalid_argument(
          fmt::format("edges[{}]: self-loop on node {}", i, e.u));
    }
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
      throw std::invalid_argument(
          fmt::format("edges[{}]: duplicate edge {}-{}", i, e.u, e.v));
    }
    const double d = euclid(nodes_[e.u], nodes_[e.v]);
    if (std::abs(d - e.length_km) > 1e-9 * std::max(1.0, d)) {
      throw std::invalid_argument(fmt::format(
          "edges[{}]: length {} km differs from node distance {} km", i,
          e.length_km, d));
    }
    if (e.length_km > max_link_km) {
      throw std::invalid_argument(fmt::format(
          "edges[{}]: length {} km exceeds max link {} km", i, e.length_km,
          max_link_km));
    }
    adjacency_[e.u].push_back({e.v, i});
    adjacency_[e.v].push_back({e.u, i});
  }
  if (!connected(n, edges_)) {
    throw std::invalid_argument("topology is not connected");
  }
}

double Topology::distance(NodeId a, NodeId b) const {
  return euclid(nodes_[a], nodes_[b]);
}

std::optional<int> Topology::edge_between(NodeId a, NodeId b) const {
  for (const Neighbor& nb : adjacency_[a]) {
    if (nb.node == b) return nb.edge;
  }
  return std::nullopt;
}

double Topology::density() const {
  const double n = node_count();
  return n < 2 ? 0.0 : edge_count() / (n * (n - 1) / 2.0);
}

double Topology::mean_degree() const {
  return node_count() == 0 ? 0.0 : 2.0 * edge_count() / node_count();
}

RequestSet::RequestSet(std::vector<RequestPair> pairs)
    : pairs_(std::move(pairs)) {
  double total = 0.0;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const RequestPair& p = pairs_[i];
    if (p.s == p.d) {
      throw std::invalid_argument(
          fmt::format("pairs[{}]: source equals destination ({})", i, p.s));
    }
    if (!(p.weight > 0.0) || !std::isfinite(p.weight)) {
      throw std::invalid_argument(
          fmt::format("pairs[{}]: weight must be positive", i));
    }
    total += p.weight;
  }
  // Already-normalized input is kept bit-exact so files round-trip.
  if (std::abs(total - 1.0) > 1e-12) {
    for (RequestPair& p : pairs_) p.weight /= total;
  }
}

void RequestSet::validate(const Topology& topo, double min_km,
                          double max_km) const {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const RequestPair& p = pairs_[i];
    for (NodeId x : {p.s, p.d}) {
      if (x < 0 || x >= topo.node_count()) {
        throw std::invalid_argument(
            fmt::format("pairs[{}]: unknown node id {}", i, x));
      }
    }
    const double dist = topo.distance(p.s, p.d);
    if (dist < min_km || dist > max_km) {
      throw std::invalid_argument(fmt::format(
          "pairs[{}]: distance {} km outside [{}, {}]", i, dist, min_km,
          max_km));
    }
  }
}

Topology gen_waxman(const WaxmanOptions& opt) {
  if (opt.nodes < 2) throw std::invalid_argument("gen_waxman: need n >= 2");
  if (!(opt.density > 0.0 && opt.density <= 1.0)) {
    throw std::invalid_argument("gen_waxman: density must be in (0, 1]");
  }
  if (!(opt.max_link_km > 0.0)) {
    throw std::invalid_argument("gen_waxman: max_link_km must be positive");
  }
  if (!(opt.width_km >= 0.0 && opt.height_km >= 0.0)) {
    throw std::invalid_argument("gen_waxman: area must be non-negative");
  }
  const int n = opt.nodes;
  const double complete = n * (n - 1) / 2.0;
  const double target = opt.density * complete;
  double best_achieved = 0.0;
  std::string last_reason;

  for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
    Rng rng = Rng::stream(opt.seed + attempt, kWaxmanStream);
    std::vector<Node> nodes(n);
    for (int i = 0; i < n; ++i) {
      nodes[i] = {i, rng.uniform(0.0, opt.width_km),
                  rng.uniform(0.0, opt.height_km)};
    }
    std::vector<Edge> candidates;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        const double d = euclid(nodes[u], nodes[v]);
        if (d <= opt.max_link_km && d > 0.0) candidates.push_back({u, v, d});
      }
    }
    auto expected = [&](double alpha) {
      double sum = 0.0;
      for (const Edge& c : candidates) {
        sum += opt.beta * std::exp(-c.length_km / (alpha * opt.max_link_km));
      }
      return sum;
    };
    // Bisect log(alpha); saturate at the upper end when the layout cannot
    // supply the target in expectation.
    double lo = std::log(1e-3), hi = std::log(1e4);
    if (expected(std::exp(hi)) > target) {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (expected(std::exp(mid)) < target ? lo : hi) = mid;
      }
    }
    const double alpha = std::exp(hi);

    std::vector<Edge> edges;
    for (const Edge& c : candidates) {
      const double p =
          opt.beta * std::exp(-c.length_km / (alpha * opt.max_link_km));
      if (rng.bernoulli(p)) edges.push_back(c);
    }
    const double achieved = edges.size() / complete;
    best_achieved = std::max(best_achieved, achieved);
    if (std::abs(static_cast<double>(edges.size()) - target) >
        opt.tolerance * target) {
      last_reason = fmt::format("{} edges vs target {:.1f}", edges.size(),
                                target);
      continue;
    }
    if (!connected(n, edges)) {
      last_reason = "disconnected";
      continue;
    }
    return Topology(std::move(nodes), std::move(edges),
                    {opt.seed, opt.density}, opt.max_link_km);
  }
  throw InfeasibleError(fmt::format(
      "infeasible-density: no connected layout with density {} within {}% "
      "after {} attempts (best achieved density {:.4f}, last: {})",
      opt.density, opt.tolerance * 100, opt.max_retries, best_achieved,
      last_reason));
}

RequestSet gen_requests(const Topology& topo, int count, double min_km,
                        double max_km, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("gen_requests: count must be >= 1");
  std::vector<std::pair<NodeId, NodeId>> candidates;
  double span_lo = std::numeric_limits<double>::infinity(), span_hi = 0.0;
  for (NodeId u = 0; u < topo.node_count(); ++u) {
    for (NodeId v = u + 1; v < topo.node_count(); ++v) {
      const double d = topo.distance(u, v);
      span_lo = std::min(span_lo, d);
      span_hi = std::max(span_hi, d);
      if (d >= min_km && d <= max_km) candidates.emplace_back(u, v);
    }
  }
  if (static_cast<int>(candidates.size()) < count) {
    throw InfeasibleError(fmt::format(
        "infeasible-range: {} pair(s) lie within [{}, {}] km but {} requested; "
        "achievable pair distances span [{:.3f}, {:.3f}] km",
        candidates.size(), min_km, max_km, count, span_lo, span_hi));
  }
  Rng rng = Rng::stream(seed, kRequestStream);
  std::vector<RequestPair> pairs;
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
    pairs.push_back({candidates[i].first, candidates[i].second, 1.0});
  }
  return RequestSet(std::move(pairs));
}

void save_topology(const Topology& topo, const std::filesystem::path& path) {
  detail::json doc;
  doc["nodes"] = detail::json::array();
  for (const Node& n : topo.nodes()) {
    doc["nodes"].push_back({{"id", n.id}, {"x_km", n.x_km}, {"y_km", n.y_km}});
  }
  doc["edges"] = detail::json::array();
  for (const Edge& e : topo.edges()) {
    doc["edges"].push_back({{"u", e.u}, {"v", e.v}, {"length_km", e.length_km}});
  }
  doc["meta"] = {{"seed", topo.meta().seed}, {"density", topo.meta().density}};
  detail::write_json_file(doc, path);
}

Topology load_topology(const std::filesystem::path& path) {
  using detail::field;
  const detail::json doc = detail::read_json_file(path);
  const std::string where = path.string();
  std::vector<Node> nodes;
  const auto& jn = detail::array_field(doc, "nodes", where);
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string at = fmt::format("{}: nodes[{}]", where, i);
    nodes.push_back({field<int>(jn[i], "id", at),
                     field<double>(jn[i], "x_km", at),
                     field<double>(jn[i], "y_km", at)});
  }
  std::vector<Edge> edges;
  const auto& je = detail::array_field(doc, "edges", where);
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string at = fmt::format("{}: edges[{}]", where, i);
    edges.push_back({field<int>(je[i], "u", at), field<int>(je[i], "v", at),
                     field<double>(je[i], "length_km", at)});
  }
  TopologyMeta meta;
  if (doc.contains("meta")) {
    meta.seed = field<std::uint64_t>(doc["meta"], "seed", where + ": meta");
    meta.density = field<double>(doc["meta"], "density", where + ": meta");
  }
  try {
    return Topology(std::move(nodes), std::move(edges), meta);
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
}

void save_requests(const RequestSet& requests,
                   const std::filesystem::path& path) {
  detail::json doc;
  doc["pairs"] = detail::json::array();
  for (const RequestPair& p : requests.pairs()) {
    doc["pairs"].push_back({{"s", p.s}, {"d", p.d}, {"weight", p.weight}});
  }
  detail::write_json_file(doc, path);
}

RequestSet load_requests(const std::filesystem::path& path) {
  using detail::field;
  const detail::json doc = detail::read_json_file(path);
  const std::string where = path.string();
  std::vector<RequestPair> pairs;
  const auto& jp = detail::array_field(doc, "pairs", where);
  for (std::size_t i = 0; i < jp.size(); ++i) {
    const std::string at = fmt::format("{}: pairs[{}]", where, i);
    pairs.push_back({field<int>(jp[i], "s", at), field<int>(jp[i], "d", at),
                     field<double>(jp[i], "weight", at)});
  }
  try {
    return RequestSet(std::move(pairs));
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace epdist
