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

#include "epdist/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "json_util.hpp"

namespace epdist {

namespace {

using detail::json;

const char* const kRowColumns[] = {
    "axis",          "x",         "algorithm",
    "seed",          "psi_s",     "total_cost",
    "sl_count",      "flagged",   "plan_ok",
    "eps_balanced",  "served",    "timeouts",
    "avg_latency_s", "max_latency_s", "sl_aggregate_latency_s",
    "mean_sl_eps_consumed", "link_attempts"};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(fmt::format("{}: '{}' is not a number", where, s));
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(fmt::format("{}: '{}' is not an integer", where, s));
  }
}

bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParseError(fmt::format("{}: '{}' is not 0 or 1", where, s));
}

}  // namespace

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(topology.nodes >= 2, "nodes must be at least 2");
  require(topology.width_km > 0 && topology.height_km > 0,
          "width_km and height_km must be positive");
  require(topology.max_link_km > 0, "max_link_km must be positive");
  require(topology.density > 0 && topology.density <= 1,
          "density must lie in (0, 1]");
  require(pairs >= 1, "pairs must be at least 1");
  require(pair_min_km >= 0 && pair_min_km <= pair_max_km,
          "pair_min_km must lie in [0, pair_max_km]");
  require(budget >= 0, "budget must be non-negative");
  require(!algorithms.empty(), "algorithms must not be empty");
  require(n_slots >= 1, "n_slots must be at least 1");
  require(!seeds.empty(), "seeds must not be empty");
  physical.validate();
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base) {
  using detail::field;
  const json doc = detail::read_json_file(path);
  const std::string where = path.string();
  if (!doc.is_object()) throw ParseError(where + ": expected a JSON object");
  ExperimentConfig c = std::move(base);
  PhysicalParams& p = c.physical;
  for (const auto& [key, value] : doc.items()) {
    const char* k = key.c_str();
    if (key == "nodes") c.topology.nodes = field<int>(doc, k, where);
    else if (key == "width_km") c.topology.width_km = field<double>(doc, k, where);
    else if (key == "height_km") c.topology.height_km = field<double>(doc, k, where);
    else if (key == "max_link_km") c.topology.max_link_km = field<double>(doc, k, where);
    else if (key == "density") c.topology.density = field<double>(doc, k, where);
    else if (key == "pairs") c.pairs = field<int>(doc, k, where);
    else if (key == "pair_min_km") c.pair_min_km = field<double>(doc, k, where);
    else if (key == "pair_max_km") c.pair_max_km = field<double>(doc, k, where);
    else if (key == "budget") c.budget = field<double>(doc, k, where);
    else if (key == "allow_overshoot") c.allow_overshoot = field<bool>(doc, k, where);
    else if (key == "n_slots") c.n_slots = field<int>(doc, k, where);
    else if (key == "seeds") c.seeds = field<std::vector<std::uint64_t>>(doc, k, where);
    else if (key == "algorithms") {
      c.algorithms.clear();
      for (const auto& name : field<std::vector<std::string>>(doc, k, where)) {
        try {
          c.algorithms.push_back(parse_algorithm(name));
        } catch (const std::invalid_argument& e) {
          throw ParseError(where + ".algorithms: " + e.what());
        }
      }
    }
    else if (key == "bsm_success") p.bsm_success = field<double>(doc, k, where);
    else if (key == "bsm_latency_s") p.bsm_latency_s = field<double>(doc, k, where);
    else if (key == "photon_gen_time_s") p.photon_gen_time_s = field<double>(doc, k, where);
    else if (key == "photon_gen_success") p.photon_gen_success = field<double>(doc, k, where);
    else if (key == "optical_bsm_success") p.optical_bsm_success = field<double>(doc, k, where);
    else if (key == "attenuation_length_km") p.attenuation_length_km = field<double>(doc, k, where);
    else if (key == "signal_speed_km_s") p.signal_speed_km_s = field<double>(doc, k, where);
    else if (key == "slot_s") p.slot_s = field<double>(doc, k, where);
    else if (key == "ttl_s") {
      if (value.is_null()) p.ttl_s.reset();
      else p.ttl_s = field<double>(doc, k, where);
    } else if (key == "fixed_classical_s") {
      if (value.is_null()) p.fixed_classical_s.reset();
      else p.fixed_classical_s = field<double>(doc, k, where);
    } else {
      throw ParseError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
  return c;
}

void save_config(const ExperimentConfig& c, const std::filesystem::path& path) {
  json doc;
  doc["nodes"] = c.topology.nodes;
  doc["width_km"] = c.topology.width_km;
  doc["height_km"] = c.topology.height_km;
  doc["max_link_km"] = c.topology.max_link_km;
  doc["density"] = c.topology.density;
  doc["pairs"] = c.pairs;
  doc["pair_min_km"] = c.pair_min_km;
  doc["pair_max_km"] = c.pair_max_km;
  doc["budget"] = c.budget;
  doc["allow_overshoot"] = c.allow_overshoot;
  doc["n_slots"] = c.n_slots;
  doc["seeds"] = c.seeds;
  doc["algorithms"] = json::array();
  for (Algorithm a : c.algorithms) doc["algorithms"].push_back(algorithm_name(a));
  const PhysicalParams& p = c.physical;
  doc["bsm_success"] = p.bsm_success;
  doc["bsm_latency_s"] = p.bsm_latency_s;
  doc["photon_gen_time_s"] = p.photon_gen_time_s;
  doc["photon_gen_success"] = p.photon_gen_success;
  doc["optical_bsm_success"] = p.optical_bsm_success;
  doc["attenuation_length_km"] = p.attenuation_length_km;
  doc["signal_speed_km_s"] = p.signal_speed_km_s;
  doc["slot_s"] = p.slot_s;
  doc["ttl_s"] = p.ttl_s ? json(*p.ttl_s) : json(nullptr);
  doc["fixed_classical_s"] =
      p.fixed_classical_s ? json(*p.fixed_classical_s) : json(nullptr);
  detail::write_json_file(doc, path);
}

Instance build_instance(const ExperimentConfig& config, std::uint64_t seed) {
  WaxmanOptions opts = config.topology;
  opts.seed = seed;
  Topology topo = gen_waxman(opts);
  RequestSet requests = gen_requests(topo, config.pairs, config.pair_min_km,
                                     config.pair_max_km, seed);
  return {std::move(topo), std::move(requests)};
}

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kBudget: return "budget";
    case SweepAxis::kDensity: return "density";
    case SweepAxis::kNodes: return "nodes";
    case SweepAxis::kPairs: return "pairs";
  }
  return "budget";
}

SweepAxis parse_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::kBudget, SweepAxis::kDensity,
                      SweepAxis::kNodes, SweepAxis::kPairs}) {
    if (axis_name(a) == name) return a;
  }
  throw std::invalid_argument(fmt::format("unknown sweep axis '{}'", name));
}

ExperimentConfig with_axis(ExperimentConfig config, SweepAxis axis, double x) {
  switch (axis) {
    case SweepAxis::kBudget: config.budget = x; break;
    case SweepAxis::kDensity: config.topology.density = x; break;
    case SweepAxis::kNodes: config.topology.nodes = static_cast<int>(x); break;
    case SweepAxis::kPairs: config.pairs = static_cast<int>(x); break;
  }
  return config;
}

std::vector<SweepRow> run_cell(const ExperimentConfig& config,
                               std::string_view axis, double x,
                               std::uint64_t seed) {
  const Instance inst = build_instance(config, seed);
  const LatencyTable table(inst.topology, config.physical);
  const Budget budget = config.budget_rule();
  std::vector<SweepRow> rows;
  for (Algorithm algo : config.algorithms) {
    const Plan plan = run_algorithm(algo, table, inst.requests, budget, seed);
    const SimMetrics m = simulate(inst.topology, plan, inst.requests,
                                  config.physical, config.n_slots, seed);
    SweepRow row;
    row.axis = std::string(axis);
    row.x = x;
    row.algorithm = std::string(algorithm_name(algo));
    row.seed = seed;
    row.psi_s = plan.psi_s;
    row.total_cost = plan.total_cost;
    row.sl_count = static_cast<int>(plan.sls.size());
    row.flagged = plan.flagged;
    row.plan_ok = plan_violations(plan, inst.requests, inst.topology,
                                  config.physical, budget)
                      .empty();
    row.eps_balanced = m.eps.balanced() && m.pause_violations == 0;
    row.served = m.served;
    row.timeouts = m.timeouts;
    row.avg_latency_s = m.avg_latency_s;
    row.max_latency_s = m.max_latency_s;
    row.sl_aggregate_latency_s = m.sl_aggregate_latency_s;
    row.mean_sl_eps_consumed = m.mean_sl_eps_consumed;
    row.link_attempts = m.link_attempts;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base,
                            const std::vector<AxisValues>& axes, int workers) {
  struct Cell {
    std::string axis;
    double x;
    ExperimentConfig config;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  if (axes.empty()) {
    for (std::uint64_t seed : base.seeds) {
      cells.push_back({"budget", base.budget, base, seed});
    }
  }
  for (const AxisValues& av : axes) {
    for (double x : av.values) {
      ExperimentConfig c = with_axis(base, av.axis, x);
      c.validate();
      for (std::uint64_t seed : base.seeds) {
        cells.push_back({std::string(axis_name(av.axis)), x, c, seed});
      }
    }
  }
  std::vector<std::vector<SweepRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = run_cell(cells[i].config, cells[i].axis, cells[i].x,
                              cells[i].seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<SweepRow> rows;
  for (auto& r : results) {
    for (SweepRow& row : r) rows.push_back(std::move(row));
  }
  return rows;
}

void write_rows(std::ostream& out, const std::vector<SweepRow>& rows) {
  bool first = true;
  for (const char* c : kRowColumns) {
    out << (first ? "" : ",") << c;
    first = false;
  }
  out << '\n';
  for (const SweepRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                       r.axis, r.x, r.algorithm, r.seed, r.psi_s, r.total_cost,
                       r.sl_count, r.flagged ? 1 : 0, r.plan_ok ? 1 : 0,
                       r.eps_balanced ? 1 : 0, r.served, r.timeouts,
                       r.avg_latency_s, r.max_latency_s,
                       r.sl_aggregate_latency_s, r.mean_sl_eps_consumed,
                       r.link_attempts);
  }
}

std::vector<SweepRow> read_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("rows: missing header");
  const auto header = split(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* c : kRowColumns) {
    if (!col.count(c)) throw ParseError(fmt::format("rows: missing column '{}'", c));
  }
  std::vector<SweepRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = fmt::format("rows:{}", line_no);
    if (cells.size() != header.size()) {
      throw ParseError(fmt::format("{}: expected {} fields, got {}", where,
                                   header.size(), cells.size()));
    }
    auto at = [&](const char* name) -> const std::string& {
      return cells[col.at(name)];
    };
    SweepRow r;
    r.axis = at("axis");
    r.x = parse_double(at("x"), where);
    r.algorithm = at("algorithm");
    r.seed = parse_u64(at("seed"), where);
    r.psi_s = parse_double(at("psi_s"), where);
    r.total_cost = parse_double(at("total_cost"), where);
    r.sl_count = static_cast<int>(parse_u64(at("sl_count"), where));
    r.flagged = parse_bool(at("flagged"), where);
    r.plan_ok = parse_bool(at("plan_ok"), where);
    r.eps_balanced = parse_bool(at("eps_balanced"), where);
    r.served = static_cast<int>(parse_u64(at("served"), where));
    r.timeouts = static_cast<int>(parse_u64(at("timeouts"), where));
    r.avg_latency_s = parse_double(at("avg_latency_s"), where);
    r.max_latency_s = parse_double(at("max_latency_s"), where);
    r.sl_aggregate_latency_s = parse_double(at("sl_aggregate_latency_s"), where);
    r.mean_sl_eps_consumed = parse_double(at("mean_sl_eps_consumed"), where);
    r.link_attempts = parse_u64(at("link_attempts"), where);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AggregateRow> analyze(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("analyze: no rows");
  std::vector<AggregateRow> out;
  std::vector<std::vector<double>> samples;
  std::map<std::tuple<std::string, double, std::string>, std::size_t> index;
  for (const SweepRow& r : rows) {
    const auto key = std::make_tuple(r.axis, r.x, r.algorithm);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      AggregateRow a;
      a.axis = r.axis;
      a.x = r.x;
      a.algorithm = r.algorithm;
      out.push_back(a);
      samples.emplace_back();
    }
    AggregateRow& a = out[it->second];
    ++a.samples;
    a.mean_avg_latency_s += r.avg_latency_s;
    a.mean_max_latency_s += r.max_latency_s;
    a.mean_sl_aggregate_latency_s += r.sl_aggregate_latency_s;
    samples[it->second].push_back(r.avg_latency_s);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    AggregateRow& a = out[i];
    a.mean_avg_latency_s /= a.samples;
    a.mean_max_latency_s /= a.samples;
    a.mean_sl_aggregate_latency_s /= a.samples;
    if (a.samples > 1) {
      double ss = 0.0;
      for (double v : samples[i]) {
        ss += (v - a.mean_avg_latency_s) * (v - a.mean_avg_latency_s);
      }
      a.stddev = std::sqrt(ss / (a.samples - 1));
    }
  }
  return out;
}

void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "x,algorithm,mean_avg_latency_s,mean_max_latency_s,"
         "mean_sl_aggregate_latency_s,stddev\n";
  for (const AggregateRow& a : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", a.x, a.algorithm,
                       a.mean_avg_latency_s, a.mean_max_latency_s,
                       a.mean_sl_aggregate_latency_s, a.stddev);
  }
}

std::vector<std::filesystem::path> write_figures(
    const std::vector<AggregateRow>& rows, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> axes;
  for (const AggregateRow& a : rows) {
    if (std::find(axes.begin(), axes.end(), a.axis) == axes.end()) {
      axes.push_back(a.axis);
    }
  }
  std::vector<std::filesystem::path> written;
  for (const std::string& axis : axes) {
    std::vector<AggregateRow> subset;
    for (const AggregateRow& a : rows) {
      if (a.axis == axis) subset.push_back(a);
    }
    const auto path = dir / (axis + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_aggregate(out, subset);
    written.push_back(path);
  }
  return written;
}

}  // namespace epdist
