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
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "epdist/cli.hpp"
#include "epdist/harness.hpp"
#include "support.hpp"

namespace epdist {
namespace {

using testing::TempDir;

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.topology.nodes = 25;
  c.topology.width_km = 60;
  c.topology.height_km = 60;
  c.topology.max_link_km = 25;
  c.topology.density = 0.15;
  c.pairs = 4;
  c.pair_min_km = 20;
  c.pair_max_km = 60;
  c.n_slots = 20;
  c.seeds = {1, 2};
  return c;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST_CASE("defaults follow the published setup") {
  const ExperimentConfig c;
  CHECK(c.topology.nodes == 100);
  CHECK(c.topology.density == 0.08);
  CHECK(c.pairs == 12);
  CHECK(c.budget == 20000);
  CHECK(c.physical.slot_s == 4.0);
  CHECK(c.physical.bsm_success == 0.4);
  CHECK(c.physical.bsm_latency_s == 10e-6);
  CHECK(c.physical.photon_gen_time_s == 50e-6);
  CHECK(c.physical.photon_gen_success == 0.33);
  CHECK(c.physical.optical_bsm_success == 0.2);
  CHECK(c.physical.attenuation_length_km == 20.0);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config files round-trip and reject unknown keys") {
  TempDir dir("config");
  ExperimentConfig c = tiny_config();
  c.physical.ttl_s = 1.5;
  c.algorithms = {Algorithm::kGg, Algorithm::kGgSp};
  save_config(c, dir / "c.json");
  const ExperimentConfig back = load_config(dir / "c.json");
  CHECK(back.topology.nodes == 25);
  CHECK(back.pairs == 4);
  CHECK(back.physical.ttl_s == 1.5);
  CHECK(back.algorithms == c.algorithms);
  CHECK(back.seeds == c.seeds);

  std::ofstream(dir / "partial.json") << R"({"budget": 5000, "allow_overshoot": true})";
  const ExperimentConfig partial = load_config(dir / "partial.json", c);
  CHECK(partial.budget == 5000);
  CHECK(partial.allow_overshoot);
  CHECK(partial.pairs == 4);

  std::ofstream(dir / "unknown.json") << R"({"budgett": 5000})";
  CHECK_THROWS_AS(load_config(dir / "unknown.json"), ParseError);
  std::ofstream(dir / "typed.json") << R"({"pairs": "many"})";
  CHECK_THROWS_AS(load_config(dir / "typed.json"), ParseError);
  std::ofstream(dir / "algo.json") << R"({"algorithms": ["gg", "magic"]})";
  CHECK_THROWS_AS(load_config(dir / "algo.json"), ParseError);
}

TEST_CASE("instances are shared across algorithms of a seed") {
  const ExperimentConfig c = tiny_config();
  const Instance a = build_instance(c, 3);
  const Instance b = build_instance(c, 3);
  CHECK(a.topology == b.topology);
  CHECK(a.requests == b.requests);
  const auto rows = run_cell(c, "budget", c.budget, 3);
  REQUIRE(rows.size() == c.algorithms.size());
  for (const SweepRow& r : rows) {
    CHECK(r.plan_ok);
    CHECK(r.eps_balanced);
    CHECK(r.served + r.timeouts == c.n_slots);
  }
}

TEST_CASE("sweep row count and worker independence") {
  ExperimentConfig c = tiny_config();
  c.algorithms = {Algorithm::kNonSls, Algorithm::kGg};
  const std::vector<AxisValues> axes = {
      {SweepAxis::kBudget, {2000, 8000}}, {SweepAxis::kPairs, {2, 3}}};
  const auto one = sweep(c, axes, 1);
  CHECK(one.size() == 2 * 2 * 2 + 2 * 2 * 2);
  const auto two = sweep(c, axes, 2);
  CHECK(one == two);
  CHECK(one.front().axis == "budget");
  CHECK(one.back().axis == "pairs");
}

TEST_CASE("rows round-trip through CSV") {
  ExperimentConfig c = tiny_config();
  c.algorithms = {Algorithm::kNonSls, Algorithm::kClus};
  const auto rows = sweep(c, {{SweepAxis::kBudget, {3000}}}, 1);
  std::stringstream buf;
  write_rows(buf, rows);
  const std::string text = buf.str();
  CHECK(text.substr(0, text.find('\n')).find("axis,x,algorithm,seed") == 0);
  CHECK(read_rows(buf) == rows);

  std::istringstream bad_header("axis,x\n");
  CHECK_THROWS_AS(read_rows(bad_header), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_rows(empty), ParseError);
}

SweepRow row(std::string algo, double x, double avg) {
  SweepRow r;
  r.axis = "budget";
  r.x = x;
  r.algorithm = std::move(algo);
  r.avg_latency_s = avg;
  r.max_latency_s = 2 * avg;
  r.sl_aggregate_latency_s = avg / 2;
  return r;
}

TEST_CASE("analyze aggregates per axis value and algorithm") {
  CHECK_THROWS_AS(analyze({}), std::invalid_argument);

  const auto single = analyze({row("gg", 5000, 0.25)});
  REQUIRE(single.size() == 1);
  CHECK(single[0].mean_avg_latency_s == 0.25);
  CHECK(single[0].stddev == 0.0);

  const auto twin = analyze({row("gg", 5000, 0.25), row("gg", 5000, 0.25)});
  REQUIRE(twin.size() == 1);
  CHECK(twin[0].stddev == 0.0);

  const std::vector<SweepRow> rows = {row("gg", 5000, 0.1), row("gg", 5000, 0.3),
                                      row("naive", 5000, 0.4),
                                      row("gg", 9000, 0.2), row("gg", 5000, 0.2)};
  const auto agg = analyze(rows);
  REQUIRE(agg.size() == 3);
  CHECK(agg[0].algorithm == "gg");
  CHECK(agg[0].samples == 3);
  CHECK(agg[0].mean_avg_latency_s == doctest::Approx(0.2));
  CHECK(agg[0].mean_max_latency_s == doctest::Approx(0.4));
  CHECK(agg[0].stddev == doctest::Approx(0.1));
  CHECK(agg[1].algorithm == "naive");
  CHECK(agg[2].x == 9000);
}

TEST_CASE("figure CSVs agree with a re-aggregation of the rows") {
  TempDir dir("figures");
  ExperimentConfig c = tiny_config();
  c.algorithms = {Algorithm::kNonSls, Algorithm::kGg};
  const auto rows = sweep(c, {{SweepAxis::kBudget, {2000, 8000}},
                              {SweepAxis::kNodes, {20, 25}}},
                          1);
  const auto files = write_figures(analyze(rows), dir.path());
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "budget.csv");
  CHECK(files[1].filename() == "nodes.csv");

  std::map<std::pair<double, std::string>, std::vector<double>> expect;
  for (const SweepRow& r : rows) {
    if (r.axis == "budget") expect[{r.x, r.algorithm}].push_back(r.avg_latency_s);
  }
  std::ifstream in(files[0]);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "x,algorithm,mean_avg_latency_s,mean_max_latency_s,"
        "mean_sl_aggregate_latency_s,stddev");
  int lines = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 6);
    const auto& v = expect.at({std::stod(cells[0]), cells[1]});
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double ss2 = 0.0;
    for (double x : v) ss2 += (x - mean) * (x - mean);
    CHECK(std::stod(cells[2]) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(std::stod(cells[5]) ==
          doctest::Approx(std::sqrt(ss2 / (v.size() - 1))).epsilon(1e-9));
    ++lines;
  }
  CHECK(lines == 4);
}

struct Cli {
  std::string out, err;
  int code = 0;
};

Cli run(std::vector<std::string> args) {
  args.insert(args.begin(), "epdist");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Cli r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

TEST_CASE("command line end to end") {
  TempDir dir("cli");
  const std::string topo = (dir / "t.json").string();
  const std::string req = (dir / "r.json").string();
  const std::string plan = (dir / "p.json").string();
  const std::string metrics = (dir / "m.json").string();

  Cli r = run({"gen-topology", "--nodes", "30", "--width-km", "70",
               "--height-km", "70", "--max-link-km", "25", "--density", "0.12",
               "--seed", "4", "--out", topo});
  CHECK(r.code == kExitOk);
  r = run({"gen-requests", "--topology", topo, "--pairs", "5", "--min-km", "20",
           "--max-km", "70", "--seed", "4", "--out", req});
  CHECK(r.code == kExitOk);
  r = run({"plan", "--topology", topo, "--requests", req, "--algo", "gg",
           "--budget", "10000", "--out", plan});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("psi_s=") == 0);
  const std::string first_plan = slurp(plan);
  r = run({"plan", "--topology", topo, "--requests", req, "--algo", "gg",
           "--budget", "10000", "--out", plan});
  CHECK(slurp(plan) == first_plan);

  r = run({"simulate", "--topology", topo, "--requests", req, "--plan", plan,
           "--slots", "10", "--out", metrics});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("served=") == 0);
  CHECK(std::filesystem::exists(metrics));

  CHECK(run({"simulate", "--algo", "non-sls", "--slots", "0"}).code == kExitUsage);
  CHECK(run({"plan", "--bogus"}).code == kExitUsage);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"plan", "--topology", topo, "--requests", req, "--algo", "best"})
            .code == kExitUsage);
  CHECK(run({"plan", "--topology", (dir / "missing.json").string()}).code ==
        kExitUsage);

  std::ofstream(dir / "broken.json") << "{";
  CHECK(run({"plan", "--topology", (dir / "broken.json").string(), "--requests",
             req})
            .code == kExitInfeasible);
  r = run({"gen-topology", "--nodes", "100", "--max-link-km", "10"});
  CHECK(r.code == kExitInfeasible);
  CHECK(r.err.find("infeasible") != std::string::npos);
}

TEST_CASE("command line sweep and analyze") {
  TempDir dir("cli_sweep");
  const std::string csv = (dir / "s.csv").string();
  Cli r = run({"sweep", "--nodes", "25", "--width-km", "60", "--height-km", "60",
               "--max-link-km", "25", "--density", "0.15", "--pairs", "4",
               "--min-km", "20", "--max-km", "60", "--budgets",
               "2000,8000", "--algos", "non-sls,gg", "--seeds", "2", "--slots",
               "10", "--out", csv});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("8 rows") != std::string::npos);
  r = run({"analyze", "--in", csv, "--out", (dir / "fig").string()});
  CHECK(r.code == kExitOk);
  CHECK(std::filesystem::exists(dir / "fig" / "budget.csv"));

  std::ofstream(dir / "empty.csv")
      << "axis,x,algorithm,seed,psi_s,total_cost,sl_count,flagged,plan_ok,"
         "eps_balanced,served,timeouts,avg_latency_s,max_latency_s,"
         "sl_aggregate_latency_s,mean_sl_eps_consumed,link_attempts\n";
  CHECK(run({"analyze", "--in", (dir / "empty.csv").string()}).code != kExitOk);
}

}  // namespace
}  // namespace epdist
