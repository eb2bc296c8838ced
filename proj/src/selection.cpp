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

#include "epdist/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace epdist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

PsiEvaluator::PsiEvaluator(const LatencyTable& table,
                           const RequestSet& requests)
    : n_(table.node_count()) {
  const int r_count = requests.size();
  weight_.reserve(r_count);
  direct_.reserve(r_count);
  via_.assign(static_cast<std::size_t>(r_count) * n_ * n_, kInf);
  for (int r = 0; r < r_count; ++r) {
    const RequestPair& rq = requests[r];
    weight_.push_back(rq.weight);
    direct_.push_back(table.direct(rq.s, rq.d).or_infinity());
    double* row = via_.data() + static_cast<std::size_t>(r) * n_ * n_;
    for (NodeId a = 0; a < n_; ++a) {
      for (NodeId b = a + 1; b < n_; ++b) {
        const double t = table.via(rq.s, rq.d, a, b);
        row[a * n_ + b] = t;
        row[b * n_ + a] = t;
      }
    }
  }
}

double PsiEvaluator::baseline() const {
  double total = 0.0;
  for (int r = 0; r < request_count(); ++r) total += weight_[r] * direct_[r];
  return total;
}

std::vector<double> PsiEvaluator::best_latencies(
    std::span<const SuperLink> sls) const {
  std::vector<double> best(direct_);
  for (int r = 0; r < request_count(); ++r) {
    for (const SuperLink& sl : sls) best[r] = std::min(best[r], via(r, sl.a, sl.b));
  }
  return best;
}

double PsiEvaluator::psi(std::span<const SuperLink> sls) const {
  const auto best = best_latencies(sls);
  double total = 0.0;
  for (int r = 0; r < request_count(); ++r) total += weight_[r] * best[r];
  return total;
}

double PsiEvaluator::psi_with(std::span<const double> best,
                              const SuperLink& extra) const {
  double total = 0.0;
  for (int r = 0; r < request_count(); ++r) {
    total += weight_[r] * std::min(best[r], via(r, extra.a, extra.b));
  }
  return total;
}

double GdslsInstance::baseline() const {
  double total = 0.0;
  for (std::size_t r = 0; r < weight.size(); ++r) total += weight[r] * direct[r];
  return total;
}

double GdslsInstance::psi(std::span<const int> chosen) const {
  double total = 0.0;
  for (std::size_t r = 0; r < weight.size(); ++r) {
    double best = direct[r];
    for (int c : chosen) best = std::min(best, latency[c][r]);
    total += weight[r] * best;
  }
  return total;
}

double GdslsInstance::cost_of(std::span<const int> chosen) const {
  double total = 0.0;
  for (int c : chosen) total += cost[c];
  return total;
}

Selection greedy_gdsls(const GdslsInstance& inst, const Budget& budget) {
  const int m = inst.candidate_count();
  const std::size_t r_count = inst.weight.size();
  Selection sel;
  std::vector<double> best(inst.direct);
  std::vector<char> used(m, 0);
  sel.psi = inst.baseline();
  for (;;) {
    int pick = -1;
    double pick_ratio = 0.0;
    double pick_psi = 0.0;
    for (int c = 0; c < m; ++c) {
      if (used[c]) continue;
      if (!inst.conflict.empty() &&
          std::any_of(sel.chosen.begin(), sel.chosen.end(),
                      [&](int o) { return inst.conflict[c][o] != 0; })) {
        continue;
      }
      if (!budget.admits(sel.cost, sel.cost + inst.cost[c])) continue;
      double next = 0.0;
      for (std::size_t r = 0; r < r_count; ++r) {
        next += inst.weight[r] * std::min(best[r], inst.latency[c][r]);
      }
      const double gain = sel.psi - next;
      if (gain <= 0.0) continue;
      const double ratio = inst.cost[c] > 0.0 ? gain / inst.cost[c] : kInf;
      if (pick < 0 || ratio > pick_ratio) {
        pick = c;
        pick_ratio = ratio;
        pick_psi = next;
      }
    }
    if (pick < 0) break;
    used[pick] = 1;
    sel.chosen.push_back(pick);
    sel.cost += inst.cost[pick];
    sel.psi = pick_psi;
    for (std::size_t r = 0; r < r_count; ++r) {
      best[r] = std::min(best[r], inst.latency[pick][r]);
    }
  }
  return sel;
}

Selection brute_force(const GdslsInstance& inst, const Budget& budget) {
  const int m = inst.candidate_count();
  if (m > kBruteForceLimit) {
    throw std::invalid_argument(fmt::format(
        "brute_force: {} candidates exceeds the limit of {}", m,
        kBruteForceLimit));
  }
  Selection best;
  best.psi = inst.baseline();
  std::vector<int> chosen;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    chosen.clear();
    for (int c = 0; c < m; ++c) {
      if (mask & (1u << c)) chosen.push_back(c);
    }
    bool compatible = true;
    if (!inst.conflict.empty()) {
      for (std::size_t i = 0; i < chosen.size() && compatible; ++i) {
        for (std::size_t j = i + 1; j < chosen.size(); ++j) {
          if (inst.conflict[chosen[i]][chosen[j]]) {
            compatible = false;
            break;
          }
        }
      }
    }
    if (!compatible) continue;
    const double cost = inst.cost_of(chosen);
    if (cost > budget.limit) continue;
    const double value = inst.psi(chosen);
    if (value < best.psi || (value == best.psi && cost < best.cost)) {
      best.chosen = chosen;
      best.psi = value;
      best.cost = cost;
    }
  }
  return best;
}

GdslsInstance make_instance(std::span<const SuperLink> candidates,
                            const PsiEvaluator& eval) {
  GdslsInstance inst;
  const int r_count = eval.request_count();
  for (int r = 0; r < r_count; ++r) {
    inst.weight.push_back(eval.weight(r));
    inst.direct.push_back(eval.direct(r));
  }
  const std::size_t m = candidates.size();
  inst.conflict.assign(m, std::vector<char>(m, 0));
  for (std::size_t c = 0; c < m; ++c) {
    inst.cost.push_back(candidates[c].cost);
    std::vector<double> row;
    for (int r = 0; r < r_count; ++r) {
      row.push_back(eval.via(r, candidates[c].a, candidates[c].b));
    }
    inst.latency.push_back(std::move(row));
    for (std::size_t o = 0; o < c; ++o) {
      const bool hit = paths_intersect(candidates[c].path, candidates[o].path);
      inst.conflict[c][o] = inst.conflict[o][c] = hit ? 1 : 0;
    }
  }
  return inst;
}

std::vector<SuperLink> enumerate_candidates(const LatencyTable& table) {
  std::vector<SuperLink> out;
  const int n = table.node_count();
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (!table.direct(a, b).reachable()) continue;
      SuperLink sl = table.super_link(a, b);
      if (sl.replenishes_within_slot(table.params())) out.push_back(std::move(sl));
    }
  }
  return out;
}

Plan make_plan(std::vector<SuperLink> sls, const RequestSet& requests,
               const LatencyTable& table) {
  Plan plan;
  plan.sls = std::move(sls);
  for (const SuperLink& sl : plan.sls) plan.total_cost += sl.cost;
  for (const RequestPair& rq : requests.pairs()) {
    AssignmentEntry entry;
    entry.s = rq.s;
    entry.d = rq.d;
    entry.latency = table.direct(rq.s, rq.d);
    for (std::size_t i = 0; i < plan.sls.size(); ++i) {
      const SuperLink& sl = plan.sls[i];
      if (!(table.via(rq.s, rq.d, sl.a, sl.b) < entry.latency.or_infinity())) {
        continue;
      }
      SlRoute route = table.route(rq.s, rq.d, sl.a, sl.b);
      entry.sl = static_cast<int>(i);
      entry.shape = route.shape;
      entry.near = route.near;
      entry.far = route.far;
      entry.to_sl = std::move(route.to_sl);
      entry.from_sl = std::move(route.from_sl);
      entry.latency = route.latency;
    }
    plan.psi_s += rq.weight * entry.latency.or_infinity();
    plan.assignment.push_back(std::move(entry));
  }
  return plan;
}

Plan greedy_gdsls(std::span<const SuperLink> candidates,
                  const RequestSet& requests, const Budget& budget,
                  const LatencyTable& table) {
  const PsiEvaluator eval(table, requests);
  const GdslsInstance inst = make_instance(candidates, eval);
  for (const auto& row : inst.conflict) {
    if (std::any_of(row.begin(), row.end(), [](char c) { return c != 0; })) {
      throw std::invalid_argument("greedy_gdsls: candidates are not disjoint");
    }
  }
  const Selection sel = greedy_gdsls(inst, budget);
  std::vector<SuperLink> sls;
  for (int c : sel.chosen) sls.push_back(candidates[c]);
  return make_plan(std::move(sls), requests, table);
}

Plan brute_force(std::span<const SuperLink> candidates,
                 const RequestSet& requests, const Budget& budget,
                 const LatencyTable& table) {
  const PsiEvaluator eval(table, requests);
  const Selection sel = brute_force(make_instance(candidates, eval), budget);
  std::vector<SuperLink> sls;
  for (int c : sel.chosen) sls.push_back(candidates[c]);
  return make_plan(std::move(sls), requests, table);
}

std::vector<std::string> plan_violations(const Plan& plan,
                                         const RequestSet& requests,
                                         const Topology& topo,
                                         const PhysicalParams& params,
                                         const Budget& budget) {
  std::vector<std::string> out;
  double cost = 0.0;
  for (std::size_t i = 0; i < plan.sls.size(); ++i) {
    const SuperLink& sl = plan.sls[i];
    try {
      validate_path(topo, sl.path);
    } catch (const std::exception& e) {
      out.push_back(fmt::format("sl {}: {}", i, e.what()));
      continue;
    }
    if (sl.path.front() != sl.a || sl.path.back() != sl.b) {
      out.push_back(fmt::format("sl {}: endpoints do not match its path", i));
    }
    if (!sl.replenishes_within_slot(params)) {
      out.push_back(fmt::format("sl {}: stock cannot refill within a slot", i));
    }
    const double recomputed = sl_cost(sl, topo, params);
    if (std::abs(recomputed - sl.cost) > 1e-9 * std::max(1.0, recomputed)) {
      out.push_back(fmt::format("sl {}: cost {} != recomputed {}", i, sl.cost,
                                recomputed));
    }
    cost += sl.cost;
    for (std::size_t j = 0; j < i; ++j) {
      if (paths_intersect(sl.path, plan.sls[j].path)) {
        out.push_back(fmt::format("sl {} and sl {} share a node", j, i));
      }
    }
  }
  if (std::abs(cost - plan.total_cost) > 1e-9 * std::max(1.0, cost)) {
    out.push_back(fmt::format("total cost {} != sum {}", plan.total_cost, cost));
  }
  if (!budget.allow_overshoot && plan.total_cost > budget.limit) {
    out.push_back(
        fmt::format("total cost {} exceeds budget {}", plan.total_cost,
                    budget.limit));
  }
  const PsiResult ref = psi(requests, plan.sls, topo, params);
  if (!(std::abs(ref.value - plan.psi_s) <= 1e-9 * std::max(1e-12, ref.value))) {
    out.push_back(fmt::format("psi {} != recomputed {}", plan.psi_s, ref.value));
  }
  if (ref.assignment.size() != plan.assignment.size()) {
    out.push_back("assignment size mismatch");
  } else {
    for (std::size_t r = 0; r < ref.assignment.size(); ++r) {
      const auto& got = plan.assignment[r];
      const auto& want = ref.assignment[r];
      if (got.s != want.s || got.d != want.d || got.sl != want.sl ||
          got.shape != want.shape) {
        out.push_back(fmt::format("request {} ({}-{}): assignment differs", r,
                                  want.s, want.d));
      }
    }
  }
  return out;
}

std::string_view algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kNonSls: return "non-sls";
    case Algorithm::kNaive: return "naive";
    case Algorithm::kGg: return "gg";
    case Algorithm::kGgSp: return "gg-sp";
    case Algorithm::kPureGreedy: return "pure-greedy";
    case Algorithm::kClus: return "clus";
  }
  return "gg";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kNonSls, Algorithm::kNaive, Algorithm::kGg,
                      Algorithm::kGgSp, Algorithm::kPureGreedy,
                      Algorithm::kClus}) {
    if (algorithm_name(a) == name) return a;
  }
  throw std::invalid_argument(fmt::format(
      "unknown algorithm '{}' (expected non-sls, naive, gg, gg-sp, "
      "pure-greedy, clus)",
      name));
}

Plan run_algorithm(Algorithm algo, const LatencyTable& table,
                   const RequestSet& requests, const Budget& budget,
                   std::uint64_t seed) {
  switch (algo) {
    case Algorithm::kNonSls:
      return make_plan({}, requests, table);
    case Algorithm::kNaive:
      return naive_select(table, requests, budget);
    case Algorithm::kGg:
      return generalized_greedy(table, requests, budget, {false, true});
    case Algorithm::kGgSp:
      return generalized_greedy(table, requests, budget, {true, true});
    case Algorithm::kPureGreedy:
      return generalized_greedy(table, requests, budget, {true, false});
    case Algorithm::kClus:
      return clustering_select(table, requests, budget, seed);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace epdist
