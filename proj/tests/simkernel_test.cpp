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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "json.hpp"

#include "epdist/simkernel.hpp"
#include "support.hpp"

namespace epdist {
namespace {

using testing::even_line;
using testing::rel_close;

PhysicalParams certain() {
  PhysicalParams p;
  p.bsm_success = 1.0;
  p.optical_bsm_success = 1.0;
  p.photon_gen_success = 1.0;
  // Fiber loss would otherwise keep link success below one.
  p.attenuation_length_km = 1e15;
  return p;
}

TEST_CASE("deterministic single link request") {
  const Topology topo = even_line(2, 12.0);
  const PhysicalParams p = certain();
  const LatencyTable table(topo, p);
  const RequestSet requests({{0, 1, 1.0}});
  const Plan plan = make_plan({}, requests, table);
  const SimMetrics m = simulate(topo, plan, requests, p, 5, 1);
  REQUIRE(m.served == 5);
  for (double t : m.latencies_s) {
    CHECK(t == doctest::Approx(p.photon_gen_time_s + 12.0 / p.signal_speed_km_s)
                   .epsilon(1e-12));
  }
  CHECK(m.link_attempts == 5);
}

TEST_CASE("two-link tree matches the renewal expectation") {
  const Topology topo = even_line(3, 10.0);
  const PhysicalParams p;
  const SwappingTree tree = optimal_tree(Path{0, 1, 2}, topo, p);
  const McEstimate est = mc_tree_latency(Path{0, 1, 2}, tree, topo, p, 10000, 3);
  // Each round waits for both links, swaps, and notifies; failures restart
  // the round, so the mean is one round divided by p_b.
  const double q = testing::attempt_success(10.0, p);
  const double round = testing::expected_max_geometric(q) *
                           testing::attempt_period(10.0, p) +
                       p.bsm_latency_s + 10.0 / p.signal_speed_km_s;
  const double oracle = round / p.bsm_success;
  CHECK(rel_close(est.mean_s, oracle, 0.10));
  CHECK(std::abs(est.mean_s - oracle) <= 4 * est.stderr_s);
  // The analytic swap formula approximates the max of two geometric waits.
  CHECK(rel_close(est.mean_s, tree.latency(), 0.25));
}

TEST_CASE("leaf-only tree matches the link latency") {
  const Topology topo = even_line(2, 17.0);
  const PhysicalParams p;
  const SwappingTree tree = optimal_tree(Path{0, 1}, topo, p);
  const McEstimate est = mc_tree_latency(Path{0, 1}, tree, topo, p, 100000, 4);
  CHECK(std::abs(est.mean_s - link_latency(17.0, p)) <= 3 * est.stderr_s);
  CHECK(rel_close(est.mean_link_attempts,
                  1.0 / testing::attempt_success(17.0, p), 0.02));
}

TEST_CASE("ideal swaps give the expected maximum of the children") {
  const Topology topo = even_line(3, 10.0);
  PhysicalParams p;
  p.bsm_success = 1.0;
  p.bsm_latency_s = 0.0;
  p.fixed_classical_s = 0.0;
  const SwappingTree tree = optimal_tree(Path{0, 1, 2}, topo, p);
  const McEstimate est = mc_tree_latency(Path{0, 1, 2}, tree, topo, p, 50000, 5);
  const double oracle =
      testing::expected_max_geometric(testing::attempt_success(10.0, p)) *
      testing::attempt_period(10.0, p);
  CHECK(std::abs(est.mean_s - oracle) <= 4 * est.stderr_s);
  CHECK(rel_close(est.mean_s, oracle, 0.02));
}

TEST_CASE("monte-carlo attempts match the cost model") {
  const Topology topo = testing::line_topology({0, 6, 15, 22, 30});
  const PhysicalParams p;
  const SuperLink sl = make_super_link(Path{0, 1, 2, 3, 4}, topo, p);
  const McEstimate est = mc_tree_latency(sl.path, sl.tree, topo, p, 20000, 6);
  CHECK(rel_close(est.mean_link_attempts, sl.cost, 0.05));
}

TEST_CASE("request equal to a stocked super-link is immediate") {
  const Topology topo = even_line(4, 10.0);
  const PhysicalParams p;
  const LatencyTable table(topo, p);
  const RequestSet requests({{0, 3, 1.0}});
  const Plan plan = make_plan({table.super_link(0, 3)}, requests, table);
  REQUIRE(plan.assignment[0].shape == Shape::kStock);
  const SimMetrics m = simulate(topo, plan, requests, p, 20, 2);
  CHECK(m.served == 20);
  CHECK(m.max_latency_s == 0.0);
  for (const RequestRecord& r : m.records) CHECK(r.sl_eps_consumed == 1);
  CHECK(m.mean_sl_eps_consumed == 1.0);
  CHECK(m.eps.taken == 20);
  CHECK(m.eps.balanced());
}

TEST_CASE("metrics are consistent with the records") {
  const Topology topo = even_line(7, 10.0);
  const PhysicalParams p;
  const LatencyTable table(topo, p);
  const RequestSet requests({{0, 6, 1.0}, {1, 5, 1.0}, {0, 3, 1.0}});
  const Plan plan = make_plan({table.super_link(2, 4)}, requests, table);
  const SimMetrics m = simulate(topo, plan, requests, p, 300, 8);
  REQUIRE(m.latencies_s.size() == 300);
  REQUIRE(m.records.size() == 300);
  const double sum =
      std::accumulate(m.latencies_s.begin(), m.latencies_s.end(), 0.0);
  CHECK(m.avg_latency_s == doctest::Approx(sum / 300).epsilon(1e-12));
  CHECK(m.max_latency_s ==
        *std::max_element(m.latencies_s.begin(), m.latencies_s.end()));
  CHECK(m.served + m.timeouts == 300);
  int sl_served = 0;
  double consumed = 0.0;
  for (const RequestRecord& r : m.records) {
    if (r.sl >= 0 && !r.timeout) {
      ++sl_served;
      consumed += r.sl_eps_consumed;
      CHECK(r.sl_eps_consumed >= 1);
    }
  }
  REQUIRE(sl_served > 0);
  CHECK(m.mean_sl_eps_consumed == doctest::Approx(consumed / sl_served));
  CHECK(m.eps.balanced());
  CHECK(m.pause_violations == 0);
  CHECK(m.sl_aggregate_latency_s ==
        doctest::Approx(std::accumulate(m.sl_mean_cycle_s.begin(),
                                        m.sl_mean_cycle_s.end(), 0.0)));
}

TEST_CASE("simulation is deterministic per seed") {
  WaxmanOptions w;
  w.nodes = 40;
  w.width_km = 70;
  w.height_km = 70;
  w.max_link_km = 25;
  w.density = 0.12;
  w.seed = 5;
  const Topology topo = gen_waxman(w);
  const PhysicalParams p;
  const LatencyTable table(topo, p);
  const RequestSet requests = gen_requests(topo, 6, 30, 90, 5);
  const Plan plan = generalized_greedy(table, requests, Budget{20000});
  const SimMetrics a = simulate(topo, plan, requests, p, 100, 11);
  const SimMetrics b = simulate(topo, plan, requests, p, 100, 11);
  CHECK(a == b);
  const SimMetrics c = simulate(topo, plan, requests, p, 100, 12);
  CHECK_FALSE(a.latencies_s == c.latencies_s);
  CHECK(a.eps.balanced());
  CHECK(c.eps.balanced());
  CHECK(a.pause_violations == 0);
  CHECK(c.pause_violations == 0);
}

TEST_CASE("memory cutoff expires EPs and keeps the books balanced") {
  const Topology topo = even_line(7, 10.0);
  PhysicalParams p;
  p.ttl_s = 0.02;
  const LatencyTable table(topo, p);
  const RequestSet requests({{0, 6, 1.0}, {1, 5, 1.0}});
  const Plan plan = make_plan({table.super_link(2, 4)}, requests, table);
  const SimMetrics m = simulate(topo, plan, requests, p, 100, 3);
  CHECK(m.eps.expired + m.tree_eps_expired > 0);
  CHECK(m.eps.balanced());
  CHECK(m.pause_violations == 0);
}

TEST_CASE("requests that outlast the slot time out") {
  const Topology topo = even_line(7, 20.0);
  PhysicalParams p;
  p.slot_s = 0.01;
  const LatencyTable table(topo, p);
  const RequestSet requests({{0, 6, 1.0}});
  const Plan plan = make_plan({}, requests, table);
  const SimMetrics m = simulate(topo, plan, requests, p, 20, 1);
  CHECK(m.timeouts > 0);
  for (const RequestRecord& r : m.records) {
    if (r.timeout) CHECK(r.latency_s == p.slot_s);
    CHECK(r.latency_s <= p.slot_s);
  }
  CHECK(m.served + m.timeouts == 20);
}

TEST_CASE("trace lines are ordered JSON events") {
  const Topology topo = even_line(5, 10.0);
  const PhysicalParams p;
  const LatencyTable table(topo, p);
  const RequestSet requests({{0, 4, 1.0}});
  const Plan plan = make_plan({table.super_link(1, 3)}, requests, table);
  std::ostringstream trace;
  const SimMetrics m = simulate(topo, plan, requests, p, 5, 2, &trace);
  std::istringstream in(trace.str());
  std::string line;
  double last = 0.0;
  std::uint64_t lines = 0;
  while (std::getline(in, line)) {
    const auto ev = nlohmann::json::parse(line);
    const double t = ev.at("time_s").get<double>();
    CHECK(t >= last);
    last = t;
    CHECK(ev.at("kind").is_string());
    CHECK(ev.contains("entities"));
    ++lines;
  }
  CHECK(lines == m.events);
}

TEST_CASE("simulate rejects bad input") {
  const Topology topo = even_line(4, 10.0);
  const PhysicalParams p;
  const LatencyTable table(topo, p);
  const RequestSet requests({{0, 3, 1.0}});
  const Plan plan = make_plan({}, requests, table);
  CHECK_THROWS_AS(simulate(topo, plan, requests, p, 0, 1), std::invalid_argument);
  const RequestSet other({{0, 2, 1.0}});
  CHECK_THROWS_AS(simulate(topo, plan, other, p, 1, 1), std::invalid_argument);
  const Topology small = even_line(3, 10.0);
  CHECK_THROWS_AS(simulate(small, plan, requests, p, 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc_tree_latency(Path{0, 1}, optimal_tree(Path{0, 1}, topo, p),
                                  topo, p, 0, 1),
                  std::invalid_argument);
}

}  // namespace
}  // namespace epdist
