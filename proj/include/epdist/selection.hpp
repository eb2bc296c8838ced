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

// Super-link selection: candidate enumeration, the ratio greedy for given
// disjoint candidates, Generalized Greedy and its variants, the k-means
// clustering approach, the sub-path baseline, and an exhaustive oracle.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epdist/latency_table.hpp"

namespace epdist {

struct Plan {
  std::vector<SuperLink> sls;  // pairwise node-disjoint paths
  std::vector<AssignmentEntry> assignment;
  double psi_s = 0.0;
  double total_cost = 0.0;
  // Set when the algorithm could not deliver what was asked (e.g. fewer
  // disjoint centroids than k); `note` says why.
  bool flagged = false;
  std::string note;
};

struct Budget {
  double limit = 0.0;
  // Loop-guard semantics: keep adding while the current cost is below the
  // limit, so the final pick may overshoot it.
  bool allow_overshoot = false;

  bool admits(double current_cost, double next_cost) const {
    return allow_overshoot ? current_cost < limit : next_cost <= limit;
  }
};

// Precomputed per-request latencies through every endpoint pair, for fast
// objective evaluation inside the selection loops.
class PsiEvaluator {
 public:
  PsiEvaluator(const LatencyTable& table, const RequestSet& requests);

  int request_count() const { return static_cast<int>(weight_.size()); }
  double weight(int r) const { return weight_[r]; }
  double direct(int r) const { return direct_[r]; }
  double via(int r, NodeId a, NodeId b) const {
    return via_[(static_cast<std::size_t>(r) * n_ + a) * n_ + b];
  }
  // Objective with no super-links.
  double baseline() const;
  double psi(std::span<const SuperLink> sls) const;
  // Per-request best latency under `sls` (direct fallback included).
  std::vector<double> best_latencies(std::span<const SuperLink> sls) const;
  // Objective after adding `extra` to a set whose per-request best
  // latencies are `best`.
  double psi_with(std::span<const double> best, const SuperLink& extra) const;

 private:
  int n_;
  std::vector<double> weight_;
  std::vector<double> direct_;
  std::vector<double> via_;
};

// Abstract instance of the given-disjoint-candidates special case.
struct GdslsInstance {
  std::vector<double> weight;                // per request
  std::vector<double> direct;                // per request
  std::vector<double> cost;                  // per candidate
  std::vector<std::vector<double>> latency;  // [candidate][request]
  // Optional pairwise conflicts; empty means all candidates are compatible.
  std::vector<std::vector<char>> conflict;

  int candidate_count() const { return static_cast<int>(cost.size()); }
  double baseline() const;
  double psi(std::span<const int> chosen) const;
  double cost_of(std::span<const int> chosen) const;
};

struct Selection {
  std::vector<int> chosen;  // candidate indices in pick order
  double psi = 0.0;
  double cost = 0.0;
};

// Repeatedly adds the affordable candidate with the highest
// (psi(L) - psi(L + l)) / cost(l); stops when nothing affordable improves.
Selection greedy_gdsls(const GdslsInstance& instance, const Budget& budget);

inline constexpr int kBruteForceLimit = 20;

// Exhaustive search over compatible, affordable subsets. Throws
// std::invalid_argument beyond kBruteForceLimit candidates.
Selection brute_force(const GdslsInstance& instance, const Budget& budget);

GdslsInstance make_instance(std::span<const SuperLink> candidates,
                            const PsiEvaluator& eval);

// One super-link per unordered node pair over its hop-shortest path, keeping
// those that can restock within one slot. Sorted by endpoints.
std::vector<SuperLink> enumerate_candidates(const LatencyTable& table);

// Builds a plan for `sls`: assignment, objective, and total cost.
Plan make_plan(std::vector<SuperLink> sls, const RequestSet& requests,
               const LatencyTable& table);

// SuperLink-level wrappers over the abstract greedy and oracle. Candidates
// for greedy_gdsls must be pairwise disjoint.
Plan greedy_gdsls(std::span<const SuperLink> candidates,
                  const RequestSet& requests, const Budget& budget,
                  const LatencyTable& table);
Plan brute_force(std::span<const SuperLink> candidates,
                 const RequestSet& requests, const Budget& budget,
                 const LatencyTable& table);

struct GreedyOptions {
  // Only hop-shortest paths may back a super-link (no residual detours).
  bool shortest_only = false;
  // Whether an Update may evict selected super-links it intersects.
  bool allow_delete = true;
};

// Generalized Greedy. Each round scores, for every node pair, an Update
// (shortest path in the full graph, evicting intersecting super-links) and
// an Append (shortest path in the graph minus selected super-link nodes),
// and applies the best one. Cost-reducing improvements outrank all
// positive-ratio options.
Plan generalized_greedy(const LatencyTable& table, const RequestSet& requests,
                        const Budget& budget, GreedyOptions options = {});

// Every contiguous sub-path (>= 1 link) of each request's shortest path that
// can restock within a slot; deduplicated, sorted by endpoints then length.
std::vector<SuperLink> naive_candidates(const LatencyTable& table,
                                        const RequestSet& requests);

// Generalized Greedy restricted to naive_candidates().
Plan naive_select(const LatencyTable& table, const RequestSet& requests,
                  const Budget& budget);

struct KmeansTrace {
  std::vector<double> best_psi;  // best objective after each iteration
  int iterations = 0;
  bool trimmed = false;  // budget repair ran
};

// k super-links by k-means style clustering of the request pairs.
Plan kmeans_k(const LatencyTable& table, const RequestSet& requests, int k,
              const Budget& budget, std::uint64_t seed,
              KmeansTrace* trace = nullptr);

// Runs kmeans_k for k = 1..|S| and keeps the plan with the lowest objective.
Plan clustering_select(const LatencyTable& table, const RequestSet& requests,
                       const Budget& budget, std::uint64_t seed);

// Empty list when the plan satisfies disjointness, budget, and objective
// consistency against a from-scratch psi() evaluation.
std::vector<std::string> plan_violations(const Plan& plan,
                                         const RequestSet& requests,
                                         const Topology& topo,
                                         const PhysicalParams& params,
                                         const Budget& budget);

enum class Algorithm { kNonSls, kNaive, kGg, kGgSp, kPureGreedy, kClus };

std::string_view algorithm_name(Algorithm algo);
// Throws std::invalid_argument for unknown names.
Algorithm parse_algorithm(std::string_view name);

Plan run_algorithm(Algorithm algo, const LatencyTable& table,
                   const RequestSet& requests, const Budget& budget,
                   std::uint64_t seed);

}  // namespace epdist
