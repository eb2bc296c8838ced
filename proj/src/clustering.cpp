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

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "epdist/random.hpp"
#include "epdist/selection.hpp"

namespace epdist {

namespace {

constexpr std::uint64_t kKmeansStream = 0x6b6d65616e73ULL;
constexpr int kMaxIterations = 200;
constexpr int kPatience = 5;

class Clustering {
 public:
  Clustering(const PsiEvaluator& eval, const std::vector<SuperLink>& cands,
             int n)
      : eval_(eval), cands_(cands), n_(n) {}

  double served(int r, int c) const {
    return std::min(eval_.direct(r), eval_.via(r, cands_[c].a, cands_[c].b));
  }

  double psi(const std::vector<int>& centroids) const {
    double total = 0.0;
    for (int r = 0; r < eval_.request_count(); ++r) {
      double best = eval_.direct(r);
      for (int c : centroids) {
        best = std::min(best, eval_.via(r, cands_[c].a, cands_[c].b));
      }
      total += eval_.weight(r) * best;
    }
    return total;
  }

  // Nodes used by every centroid except `skip`.
  std::vector<char> occupied(const std::vector<int>& centroids,
                             std::size_t skip) const {
    std::vector<char> mask(n_, 0);
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      if (j == skip) continue;
      for (NodeId x : cands_[centroids[j]].path) mask[x] = 1;
    }
    return mask;
  }

  bool fits(int c, const std::vector<char>& mask) const {
    return std::none_of(cands_[c].path.begin(), cands_[c].path.end(),
                        [&](NodeId x) { return mask[x] != 0; });
  }

  // Centroid index closest to each request (lowest index on ties).
  std::vector<int> assign(const std::vector<int>& centroids) const {
    std::vector<int> out(eval_.request_count(), 0);
    for (int r = 0; r < eval_.request_count(); ++r) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < centroids.size(); ++j) {
        const double t = eval_.via(r, cands_[centroids[j]].a,
                                   cands_[centroids[j]].b);
        if (t < best) {
          best = t;
          out[r] = static_cast<int>(j);
        }
      }
    }
    return out;
  }

  // Candidate minimizing the cluster's weighted latency among those disjoint
  // from `mask`; keeps `current` unless something is strictly better.
  int best_for(const std::vector<int>& members, int current,
               const std::vector<char>& mask) const {
    auto score = [&](int c) {
      double total = 0.0;
      for (int r : members) total += eval_.weight(r) * served(r, c);
      return total;
    };
    int pick = current;
    double pick_score = score(current);
    for (int c = 0; c < static_cast<int>(cands_.size()); ++c) {
      if (c == current || !fits(c, mask)) continue;
      const double s = score(c);
      if (s < pick_score) {
        pick = c;
        pick_score = s;
      }
    }
    return pick;
  }

 private:
  const PsiEvaluator& eval_;
  const std::vector<SuperLink>& cands_;
  int n_;
};

std::vector<SuperLink> drop_unused(std::vector<SuperLink> sls,
                                   const RequestSet& requests,
                                   const LatencyTable& table) {
  const Plan plan = make_plan(sls, requests, table);
  std::vector<char> used(sls.size(), 0);
  for (const AssignmentEntry& e : plan.assignment) {
    if (e.sl >= 0) used[e.sl] = 1;
  }
  std::vector<SuperLink> out;
  for (std::size_t i = 0; i < sls.size(); ++i) {
    if (used[i]) out.push_back(std::move(sls[i]));
  }
  return out;
}

double total_cost(const std::vector<SuperLink>& sls) {
  double c = 0.0;
  for (const SuperLink& sl : sls) c += sl.cost;
  return c;
}

// Shrinks the set until it fits the budget, each step taking the trim (drop
// one end link of a super-link, or remove a single-link super-link) with the
// smallest objective increase per unit of cost saved.
std::vector<SuperLink> repair_budget(std::vector<SuperLink> sls,
                                     const PsiEvaluator& eval,
                                     const LatencyTable& table, double limit) {
  const PhysicalParams& p = table.params();
  while (!sls.empty() && total_cost(sls) > limit) {
    const double base = eval.psi(sls);
    double best_rate = std::numeric_limits<double>::infinity();
    std::optional<std::vector<SuperLink>> best_next;
    auto consider = [&](std::vector<SuperLink> next, double saved) {
      if (saved <= 0.0) return;
      const double rate = (eval.psi(next) - base) / saved;
      if (!best_next || rate < best_rate) {
        best_rate = rate;
        best_next = std::move(next);
      }
    };
    for (std::size_t i = 0; i < sls.size(); ++i) {
      const SuperLink& sl = sls[i];
      if (sl.path.size() <= 2) {
        std::vector<SuperLink> next = sls;
        next.erase(next.begin() + i);
        consider(std::move(next), sl.cost);
        continue;
      }
      for (int side = 0; side < 2; ++side) {
        Path shorter(sl.path.begin() + (side == 0 ? 1 : 0),
                     sl.path.end() - (side == 0 ? 0 : 1));
        SuperLink trimmed =
            make_super_link(std::move(shorter), table.topology(), p);
        if (!trimmed.replenishes_within_slot(p)) continue;
        const double saved = sl.cost - trimmed.cost;
        std::vector<SuperLink> next = sls;
        next[i] = std::move(trimmed);
        consider(std::move(next), saved);
      }
    }
    if (!best_next) {
      // Nothing trims cleanly; drop the most expensive super-link.
      sls.erase(std::max_element(
          sls.begin(), sls.end(),
          [](const SuperLink& x, const SuperLink& y) { return x.cost < y.cost; }));
      continue;
    }
    sls = std::move(*best_next);
  }
  return sls;
}

}  // namespace

Plan kmeans_k(const LatencyTable& table, const RequestSet& requests, int k,
              const Budget& budget, std::uint64_t seed, KmeansTrace* trace) {
  if (k < 1 || k > std::max(1, requests.size())) {
    throw std::invalid_argument(
        fmt::format("kmeans_k: k must be in [1, {}], got {}",
                    std::max(1, requests.size()), k));
  }
  const PsiEvaluator eval(table, requests);
  const std::vector<SuperLink> cands = enumerate_candidates(table);
  const Clustering clus(eval, cands, table.node_count());
  KmeansTrace local;
  KmeansTrace& tr = trace ? *trace : local;
  tr = {};

  // Random disjoint initial centroids.
  Rng rng = Rng::stream(seed, kKmeansStream);
  std::vector<int> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<int> centroids;
  std::vector<char> mask(table.node_count(), 0);
  for (int c : order) {
    if (static_cast<int>(centroids.size()) == k) break;
    if (!clus.fits(c, mask)) continue;
    centroids.push_back(c);
    for (NodeId x : cands[c].path) mask[x] = 1;
  }

  std::vector<int> best_centroids = centroids;
  double best_psi = clus.psi(centroids);
  int stale = 0;
  while (!centroids.empty() && tr.iterations < kMaxIterations) {
    ++tr.iterations;
    const std::vector<int> owner = clus.assign(centroids);
    const std::vector<int> before = centroids;
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      std::vector<int> members;
      for (int r = 0; r < requests.size(); ++r) {
        if (owner[r] == static_cast<int>(j)) members.push_back(r);
      }
      const auto others = clus.occupied(centroids, j);
      if (members.empty()) {
        // Reseed toward the request served worst by the other centroids.
        std::vector<int> rest = centroids;
        rest.erase(rest.begin() + j);
        int worst = -1;
        double worst_t = -1.0;
        for (int r = 0; r < requests.size(); ++r) {
          double t = eval.direct(r);
          for (int c : rest) t = std::min(t, clus.served(r, c));
          if (t > worst_t) {
            worst_t = t;
            worst = r;
          }
        }
        if (worst >= 0) members.push_back(worst);
      }
      centroids[j] = clus.best_for(members, centroids[j], others);
    }
    const double value = clus.psi(centroids);
    if (value < best_psi) {
      best_psi = value;
      best_centroids = centroids;
      stale = 0;
    } else {
      ++stale;
    }
    tr.best_psi.push_back(best_psi);
    if (centroids == before || stale >= kPatience) break;
  }

  std::vector<SuperLink> sls;
  for (int c : best_centroids) sls.push_back(cands[c]);
  sls = drop_unused(std::move(sls), requests, table);
  if (!budget.allow_overshoot && total_cost(sls) > budget.limit) {
    tr.trimmed = true;
    sls = repair_budget(std::move(sls), eval, table, budget.limit);
    sls = drop_unused(std::move(sls), requests, table);
  }
  Plan plan = make_plan(std::move(sls), requests, table);
  if (static_cast<int>(centroids.size()) < k) {
    plan.flagged = true;
    plan.note = fmt::format("only {} disjoint centroids available for k = {}",
                            centroids.size(), k);
  }
  return plan;
}

Plan clustering_select(const LatencyTable& table, const RequestSet& requests,
                       const Budget& budget, std::uint64_t seed) {
  Plan best = make_plan({}, requests, table);
  for (int k = 1; k <= requests.size(); ++k) {
    Plan plan = kmeans_k(table, requests, k, budget, seed + k);
    if (plan.psi_s < best.psi_s) best = std::move(plan);
  }
  return best;
}

}  // namespace epdist
