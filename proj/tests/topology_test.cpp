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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <utility>

#include "json.hpp"

#include "epdist/paths.hpp"
#include "epdist/topology.hpp"
#include "support.hpp"

namespace epdist {
namespace {

using testing::TempDir;

WaxmanOptions small_options(std::uint64_t seed) {
  WaxmanOptions w;
  w.nodes = 20;
  w.width_km = 40;
  w.height_km = 40;
  w.max_link_km = 25;
  w.density = 0.15;
  w.seed = seed;
  return w;
}

bool connected(const Topology& topo) {
  std::vector<char> seen(topo.node_count(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const Edge& e : topo.edges()) {
      int v = -1;
      if (e.u == u) v = e.v;
      if (e.v == u) v = e.u;
      if (v >= 0 && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == topo.node_count();
}

TEST_CASE("waxman graph meets its structural contract") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const WaxmanOptions w = small_options(seed);
    const Topology topo = gen_waxman(w);
    CHECK(topo.node_count() == 20);
    CHECK(connected(topo));
    const double target = w.density * 20 * 19 / 2;
    CHECK(std::abs(topo.edge_count() - target) <= 0.1 * target + 1e-9);
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : topo.edges()) {
      CHECK(e.u != e.v);
      CHECK(seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second);
      const Node& a = topo.nodes()[e.u];
      const Node& b = topo.nodes()[e.v];
      const double d = std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
      CHECK(e.length_km == doctest::Approx(d).epsilon(1e-12));
      CHECK(e.length_km <= w.max_link_km);
    }
  }
}

TEST_CASE("waxman edge count matches a recount of the saved file") {
  TempDir dir("topo");
  WaxmanOptions w = small_options(3);
  const Topology topo = gen_waxman(w);
  save_topology(topo, dir / "t.json");
  std::ifstream in(dir / "t.json");
  const nlohmann::json doc = nlohmann::json::parse(in);
  const int edges = static_cast<int>(doc.at("edges").size());
  CHECK(edges == topo.edge_count());
  const double target = 0.15 * 190;
  CHECK(std::abs(edges - target) <= 0.1 * target + 1e-9);
}

TEST_CASE("twenty nodes cannot be connected at eight percent density") {
  // 0.08 * C(20, 2) = 15.2 edges, fewer than the 19 a spanning tree needs.
  WaxmanOptions w = small_options(3);
  w.density = 0.08;
  w.max_retries = 5;
  CHECK_THROWS_AS(gen_waxman(w), InfeasibleError);
}

TEST_CASE("default scale topology") {
  WaxmanOptions w;
  w.seed = 7;
  const Topology topo = gen_waxman(w);
  CHECK(topo.node_count() == 100);
  CHECK(std::abs(topo.edge_count() - 396) <= 39.6);
  CHECK(connected(topo));
}

TEST_CASE("ten kilometre links cannot reach eight percent density") {
  WaxmanOptions w;
  w.max_link_km = 10.0;
  w.seed = 7;
  w.max_retries = 5;
  CHECK_THROWS_AS(gen_waxman(w), InfeasibleError);
  try {
    gen_waxman(w);
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("achieved density") != std::string::npos);
  }
}

TEST_CASE("two nodes within range form a single edge") {
  WaxmanOptions w;
  w.nodes = 2;
  w.width_km = 3;
  w.height_km = 3;
  w.max_link_km = 10;
  w.density = 1.0;
  const Topology topo = gen_waxman(w);
  REQUIRE(topo.edge_count() == 1);
  CHECK(topo.edges()[0].length_km == doctest::Approx(topo.distance(0, 1)));
}

TEST_CASE("generation is deterministic per seed") {
  CHECK(gen_waxman(small_options(5)) == gen_waxman(small_options(5)));
  CHECK_FALSE(gen_waxman(small_options(5)) == gen_waxman(small_options(6)));
  const Topology topo = gen_waxman(small_options(5));
  CHECK(gen_requests(topo, 4, 5, 40, 2) == gen_requests(topo, 4, 5, 40, 2));
}

TEST_CASE("short edges are more frequent than long ones") {
  long short_edges = 0, short_pairs = 0, long_edges = 0, long_pairs = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    WaxmanOptions w;
    w.nodes = 60;
    w.width_km = 40;
    w.height_km = 40;
    w.max_link_km = 10;
    w.density = 0.06;
    w.seed = seed;
    const Topology topo = gen_waxman(w);
    for (int a = 0; a < topo.node_count(); ++a) {
      for (int b = a + 1; b < topo.node_count(); ++b) {
        const double d = topo.distance(a, b);
        const bool edge = topo.edge_between(a, b).has_value();
        if (d < 5.0) {
          ++short_pairs;
          short_edges += edge;
        } else if (d < 10.0) {
          ++long_pairs;
          long_edges += edge;
        }
      }
    }
  }
  REQUIRE(short_pairs > 0);
  REQUIRE(long_pairs > 0);
  CHECK(static_cast<double>(short_edges) / short_pairs >=
        static_cast<double>(long_edges) / long_pairs);
}

TEST_CASE("requests respect the distance range") {
  const Topology topo = gen_waxman(WaxmanOptions{});
  const RequestSet requests = gen_requests(topo, 12, 30, 120, 1);
  REQUIRE(requests.size() == 12);
  double total = 0.0;
  std::set<std::pair<int, int>> seen;
  for (const RequestPair& r : requests.pairs()) {
    CHECK(r.s != r.d);
    const double d = topo.distance(r.s, r.d);
    CHECK(d >= 30.0);
    CHECK(d <= 120.0);
    CHECK(r.weight == doctest::Approx(1.0 / 12));
    CHECK(seen.insert({std::min(r.s, r.d), std::max(r.s, r.d)}).second);
    total += r.weight;
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("single feasible pair") {
  const Topology topo(
      {{0, 0, 0}, {1, 40, 0}}, {{0, 1, 40}});
  const RequestSet r = gen_requests(topo, 1, 30, 120, 9);
  REQUIRE(r.size() == 1);
  CHECK(r[0].weight == 1.0);
  CHECK(std::min(r[0].s, r[0].d) == 0);
  CHECK(std::max(r[0].s, r[0].d) == 1);
  CHECK_THROWS_AS(gen_requests(topo, 2, 30, 120, 9), InfeasibleError);
  CHECK_THROWS_AS(gen_requests(topo, 1, 50, 120, 9), InfeasibleError);
}

TEST_CASE("weights are normalized and validated") {
  const RequestSet r({{0, 1, 2.0}, {1, 2, 6.0}});
  CHECK(r[0].weight == doctest::Approx(0.25));
  CHECK(r[1].weight == doctest::Approx(0.75));
  CHECK_THROWS_AS(RequestSet({{1, 1, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(RequestSet({{0, 1, 0.0}}), std::invalid_argument);
}

TEST_CASE("topology constructor rejects broken graphs") {
  const std::vector<Node> nodes = {{0, 0, 0}, {1, 5, 0}, {2, 10, 0}};
  CHECK_THROWS(Topology(nodes, {{0, 1, 5}, {1, 1, 0}}));
  CHECK_THROWS(Topology(nodes, {{0, 1, 5}, {1, 0, 5}, {1, 2, 5}}));
  CHECK_THROWS(Topology(nodes, {{0, 1, 5}, {1, 2, 7}}));
  CHECK_THROWS(Topology(nodes, {{0, 1, 5}}));
  CHECK_THROWS(Topology(nodes, {{0, 1, 5}, {1, 2, 5}}, {}, 4.0));
  CHECK_NOTHROW(Topology(nodes, {{0, 1, 5}, {1, 2, 5}}));
}

TEST_CASE("topology and requests round-trip through files") {
  TempDir dir("roundtrip");
  const Topology topo = gen_waxman(small_options(2));
  save_topology(topo, dir / "t.json");
  CHECK(load_topology(dir / "t.json") == topo);
  const RequestSet req = gen_requests(topo, 4, 5, 40, 2);
  save_requests(req, dir / "r.json");
  CHECK(load_requests(dir / "r.json") == req);
}

TEST_CASE("malformed topology files are parse errors") {
  TempDir dir("bad");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  const auto unknown = write(
      "unknown.json",
      R"({"nodes":[{"id":0,"x_km":0,"y_km":0},{"id":1,"x_km":5,"y_km":0}],
          "edges":[{"u":0,"v":7,"length_km":5}],"meta":{"seed":1,"density":1}})");
  try {
    load_topology(unknown);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find('7') != std::string::npos);
  }
  const auto dup = write(
      "dup.json",
      R"({"nodes":[{"id":0,"x_km":0,"y_km":0},{"id":1,"x_km":5,"y_km":0}],
          "edges":[{"u":0,"v":1,"length_km":5},{"u":1,"v":0,"length_km":5}],
          "meta":{"seed":1,"density":1}})");
  CHECK_THROWS_AS(load_topology(dup), ParseError);
  CHECK_THROWS_AS(load_topology(write("junk.json", "{nodes")), ParseError);
  CHECK_THROWS(load_topology(dir / "missing.json"));
  CHECK_THROWS_AS(load_requests(write("req.json", R"({"pairs":[{"s":0}]})")),
                  ParseError);
}

TEST_CASE("shortest paths minimize hops then length") {
  // 0-1-3 (two hops, 20 km) and 0-2-3 (two hops, longer), 0-4-5-3 (three).
  const Topology topo({{0, 0, 0},
                       {1, 10, 0},
                       {2, 10, 8},
                       {3, 20, 0},
                       {4, 0, -5},
                       {5, 15, -5}},
                      {{0, 1, 10},
                       {1, 3, 10},
                       {0, 2, std::hypot(10, 8)},
                       {2, 3, std::hypot(10, 8)},
                       {0, 4, 5},
                       {4, 5, 15},
                       {5, 3, std::hypot(5, 5)}});
  CHECK(shortest_path(topo, 0, 3) == Path{0, 1, 3});
  CHECK(shortest_path(topo, 3, 0) == Path{3, 1, 0});
  std::vector<char> blocked(6, 0);
  blocked[1] = 1;
  CHECK(shortest_path(topo, 0, 3, blocked) == Path{0, 2, 3});
  blocked[2] = 1;
  CHECK(shortest_path(topo, 0, 3, blocked) == Path{0, 4, 5, 3});
  blocked[4] = 1;
  CHECK_FALSE(shortest_path(topo, 0, 3, blocked).has_value());
  CHECK_THROWS(validate_path(topo, Path{0, 3}));
  CHECK_THROWS(validate_path(topo, Path{0, 1, 0}));
  CHECK_NOTHROW(validate_path(topo, Path{0, 1, 3}));
  CHECK(paths_intersect(Path{0, 1}, Path{1, 3}));
  CHECK_FALSE(paths_intersect(Path{0, 1}, Path{2, 3}));
}

}  // namespace
}  // namespace epdist
