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

#include "epdist/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "epdist/harness.hpp"
#include "epdist/plan_io.hpp"

namespace epdist {

namespace {

// Flags shared by every subcommand.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 1;
  bool allow_overshoot = false;
  std::optional<double> fixed_tc;
  std::optional<double> ttl;

  void attach(CLI::App* app, const std::string& default_out) {
    out = default_out;
    app->add_option("--config", config, "JSON file of configuration overrides")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Base random seed");
    app->add_option("--out", out, "Output path")->capture_default_str();
    app->add_option("--workers", workers, "Worker threads")
        ->check(CLI::PositiveNumber);
    app->add_flag("--allow-overshoot", allow_overshoot,
                  "Admit options while current cost is below the budget");
    app->add_option("--fixed-tc", fixed_tc,
                    "Fixed classical delay per swap, seconds")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--ttl", ttl, "EP memory cutoff, seconds")
        ->check(CLI::PositiveNumber);
  }

  ExperimentConfig resolve(ExperimentConfig base) const {
    ExperimentConfig c =
        config.empty() ? std::move(base) : load_config(config, std::move(base));
    if (allow_overshoot) c.allow_overshoot = true;
    if (fixed_tc) c.physical.fixed_classical_s = *fixed_tc;
    if (ttl) c.physical.ttl_s = *ttl;
    return c;
  }

  std::uint64_t seed_or(const ExperimentConfig& c) const {
    return seed ? *seed : c.seeds.front();
  }
};

struct TopologyFlags {
  std::optional<int> nodes;
  std::optional<double> density;
  std::optional<double> max_link_km;
  std::optional<double> width_km;
  std::optional<double> height_km;

  void attach(CLI::App* app) {
    app->add_option("--nodes", nodes, "Node count")->check(CLI::PositiveNumber);
    app->add_option("--density", density, "Edge density |E| / C(n, 2)");
    app->add_option("--max-link-km", max_link_km, "Longest allowed link");
    app->add_option("--width-km", width_km, "Area width");
    app->add_option("--height-km", height_km, "Area height");
  }

  void apply(ExperimentConfig& c) const {
    if (nodes) c.topology.nodes = *nodes;
    if (density) c.topology.density = *density;
    if (max_link_km) c.topology.max_link_km = *max_link_km;
    if (width_km) c.topology.width_km = *width_km;
    if (height_km) c.topology.height_km = *height_km;
  }
};

struct RequestFlags {
  std::optional<int> count;
  std::optional<double> min_km;
  std::optional<double> max_km;

  void attach(CLI::App* app) {
    app->add_option("--pairs", count, "Number of request pairs")
        ->check(CLI::PositiveNumber);
    app->add_option("--min-km", min_km, "Minimum s-d distance");
    app->add_option("--max-km", max_km, "Maximum s-d distance");
  }

  void apply(ExperimentConfig& c) const {
    if (count) c.pairs = *count;
    if (min_km) c.pair_min_km = *min_km;
    if (max_km) c.pair_max_km = *max_km;
  }
};

// Topology and requests from files when given, generated otherwise.
Instance load_or_build(const ExperimentConfig& c, std::uint64_t seed,
                       const std::string& topology_path,
                       const std::string& requests_path) {
  if (topology_path.empty() && requests_path.empty()) {
    return build_instance(c, seed);
  }
  Topology topo = topology_path.empty()
                      ? gen_waxman([&] {
                          WaxmanOptions o = c.topology;
                          o.seed = seed;
                          return o;
                        }())
                      : load_topology(topology_path);
  RequestSet requests =
      requests_path.empty()
          ? gen_requests(topo, c.pairs, c.pair_min_km, c.pair_max_km, seed)
          : load_requests(requests_path);
  try {
    requests.validate(topo);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("requests do not fit the topology: ") + e.what());
  }
  return {std::move(topo), std::move(requests)};
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(
          fmt::format("{}: '{}' is not a number", flag, item));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<Algorithm> parse_algos(const std::string& text) {
  std::vector<Algorithm> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    out.push_back(parse_algorithm(text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Entanglement distribution planning and simulation", "epdist"};
  app.require_subcommand(1);

  Common c_topo, c_req, c_plan, c_sim, c_sweep, c_an;
  TopologyFlags t_topo, t_req, t_plan, t_sim, t_sweep;
  RequestFlags r_req, r_plan, r_sim, r_sweep;

  auto* gen_topo = app.add_subcommand("gen-topology", "Generate a Waxman topology");
  c_topo.attach(gen_topo, "topology.json");
  t_topo.attach(gen_topo);

  std::string req_topology;
  auto* gen_req = app.add_subcommand("gen-requests", "Sample request pairs");
  c_req.attach(gen_req, "requests.json");
  t_req.attach(gen_req);
  r_req.attach(gen_req);
  gen_req->add_option("--topology", req_topology, "Topology file")
      ->check(CLI::ExistingFile);

  std::string plan_topology, plan_requests, plan_algo = "gg";
  std::optional<double> plan_budget;
  auto* plan_cmd = app.add_subcommand("plan", "Select super-links");
  c_plan.attach(plan_cmd, "plan.json");
  t_plan.attach(plan_cmd);
  r_plan.attach(plan_cmd);
  plan_cmd->add_option("--topology", plan_topology, "Topology file")
      ->check(CLI::ExistingFile);
  plan_cmd->add_option("--requests", plan_requests, "Request file")
      ->check(CLI::ExistingFile);
  plan_cmd->add_option("--algo", plan_algo,
                       "non-sls, naive, gg, gg-sp, pure-greedy, clus")
      ->capture_default_str();
  plan_cmd->add_option("--budget", plan_budget, "Budget in link attempts")
      ->check(CLI::NonNegativeNumber);

  std::string sim_topology, sim_requests, sim_plan, sim_algo = "gg", sim_trace;
  std::optional<double> sim_budget;
  std::optional<int> sim_slots;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a plan");
  c_sim.attach(sim_cmd, "metrics.json");
  t_sim.attach(sim_cmd);
  r_sim.attach(sim_cmd);
  sim_cmd->add_option("--topology", sim_topology, "Topology file")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--requests", sim_requests, "Request file")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--plan", sim_plan, "Plan file (else planned with --algo)")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--algo", sim_algo, "Algorithm when no plan is given")
      ->capture_default_str();
  sim_cmd->add_option("--budget", sim_budget, "Budget in link attempts")
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--slots", sim_slots, "Number of request slots")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--trace", sim_trace, "Line-delimited JSON event trace");

  std::string sw_budgets, sw_densities, sw_nodes, sw_pairs, sw_algos;
  std::optional<int> sw_seeds, sw_slots;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  c_sweep.attach(sweep_cmd, "sweep.csv");
  t_sweep.attach(sweep_cmd);
  r_sweep.attach(sweep_cmd);
  sweep_cmd->add_option("--budgets", sw_budgets, "Comma-separated budgets");
  sweep_cmd->add_option("--densities", sw_densities, "Comma-separated densities");
  sweep_cmd->add_option("--node-counts", sw_nodes, "Comma-separated node counts");
  sweep_cmd->add_option("--pair-counts", sw_pairs, "Comma-separated pair counts");
  sweep_cmd->add_option("--algos", sw_algos, "Comma-separated algorithms");
  sweep_cmd->add_option("--seeds", sw_seeds, "Number of seeds")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--slots", sw_slots, "Slots per simulation")
      ->check(CLI::PositiveNumber);

  std::string an_in;
  auto* an_cmd = app.add_subcommand("analyze", "Aggregate sweep rows per axis");
  c_an.attach(an_cmd, "figures");
  an_cmd->add_option("--in", an_in, "Sweep CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_topo->parsed()) {
      ExperimentConfig c = c_topo.resolve({});
      t_topo.apply(c);
      c.validate();
      WaxmanOptions o = c.topology;
      o.seed = c_topo.seed_or(c);
      const Topology topo = gen_waxman(o);
      save_topology(topo, c_topo.out);
      out << fmt::format("wrote {}: {} nodes, {} edges, density {}\n",
                         c_topo.out, topo.node_count(), topo.edge_count(),
                         topo.density());
    } else if (gen_req->parsed()) {
      ExperimentConfig c = c_req.resolve({});
      t_req.apply(c);
      r_req.apply(c);
      c.validate();
      const std::uint64_t seed = c_req.seed_or(c);
      const Instance inst = load_or_build(c, seed, req_topology, "");
      save_requests(inst.requests, c_req.out);
      out << fmt::format("wrote {}: {} pairs\n", c_req.out, inst.requests.size());
    } else if (plan_cmd->parsed()) {
      ExperimentConfig c = c_plan.resolve({});
      t_plan.apply(c);
      r_plan.apply(c);
      if (plan_budget) c.budget = *plan_budget;
      c.validate();
      const Algorithm algo = parse_algorithm(plan_algo);
      const std::uint64_t seed = c_plan.seed_or(c);
      const Instance inst = load_or_build(c, seed, plan_topology, plan_requests);
      const LatencyTable table(inst.topology, c.physical);
      const Plan plan = run_algorithm(algo, table, inst.requests,
                                      c.budget_rule(), seed);
      save_plan(plan, c_plan.out);
      out << fmt::format("psi_s={} total_cost={} sls={}{}\n", plan.psi_s,
                         plan.total_cost, plan.sls.size(),
                         plan.flagged ? " flagged: " + plan.note : "");
    } else if (sim_cmd->parsed()) {
      ExperimentConfig c = c_sim.resolve({});
      t_sim.apply(c);
      r_sim.apply(c);
      if (sim_budget) c.budget = *sim_budget;
      if (sim_slots) c.n_slots = *sim_slots;
      c.validate();
      const std::uint64_t seed = c_sim.seed_or(c);
      const Instance inst = load_or_build(c, seed, sim_topology, sim_requests);
      const LatencyTable table(inst.topology, c.physical);
      const Plan plan =
          sim_plan.empty()
              ? run_algorithm(parse_algorithm(sim_algo), table, inst.requests,
                              c.budget_rule(), seed)
              : load_plan(sim_plan, inst.topology, c.physical);
      std::ofstream trace_file;
      if (!sim_trace.empty()) {
        trace_file.open(sim_trace);
        if (!trace_file) throw std::runtime_error("cannot write " + sim_trace);
      }
      const SimMetrics m =
          simulate(inst.topology, plan, inst.requests, c.physical, c.n_slots,
                   seed, sim_trace.empty() ? nullptr : &trace_file);
      save_metrics(m, c_sim.out);
      out << fmt::format(
          "served={} timeouts={} avg_latency_s={} max_latency_s={} "
          "sl_aggregate_latency_s={}\n",
          m.served, m.timeouts, m.avg_latency_s, m.max_latency_s,
          m.sl_aggregate_latency_s);
    } else if (sweep_cmd->parsed()) {
      ExperimentConfig base;
      base.topology.nodes = 50;
      ExperimentConfig c = c_sweep.resolve(base);
      t_sweep.apply(c);
      r_sweep.apply(c);
      if (!sw_algos.empty()) c.algorithms = parse_algos(sw_algos);
      if (sw_slots) c.n_slots = *sw_slots;
      if (sw_seeds) {
        const std::uint64_t first = c_sweep.seed ? *c_sweep.seed : 1;
        c.seeds.clear();
        for (int i = 0; i < *sw_seeds; ++i) c.seeds.push_back(first + i);
      } else if (c_sweep.seed) {
        c.seeds = {*c_sweep.seed};
      }
      c.validate();
      std::vector<AxisValues> axes;
      if (!sw_budgets.empty()) {
        axes.push_back({SweepAxis::kBudget, parse_list(sw_budgets, "--budgets")});
      }
      if (!sw_densities.empty()) {
        axes.push_back({SweepAxis::kDensity, parse_list(sw_densities, "--densities")});
      }
      if (!sw_nodes.empty()) {
        axes.push_back({SweepAxis::kNodes, parse_list(sw_nodes, "--node-counts")});
      }
      if (!sw_pairs.empty()) {
        axes.push_back({SweepAxis::kPairs, parse_list(sw_pairs, "--pair-counts")});
      }
      const auto rows = sweep(c, axes, c_sweep.workers);
      std::ofstream file(c_sweep.out);
      if (!file) throw std::runtime_error("cannot write " + c_sweep.out);
      write_rows(file, rows);
      out << fmt::format("wrote {}: {} rows\n", c_sweep.out, rows.size());
    } else if (an_cmd->parsed()) {
      std::ifstream in(an_in);
      if (!in) throw std::runtime_error("cannot open " + an_in);
      const auto rows = read_rows(in);
      const auto written = write_figures(analyze(rows), c_an.out);
      for (const auto& p : written) out << "wrote " << p.string() << '\n';
    }
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  }
  return kExitOk;
}

}  // namespace epdist
