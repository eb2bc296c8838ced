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
#include <optional>
#include <set>

#include "epdist/selection.hpp"

namespace epdist {

namespace {

// One round of the greedy loop: holds the selected set and keeps the best
// scored option seen so far. Options must be offered in tie-break order
// (endpoints ascending, shorter path first); only strictly better options
// replace the incumbent.
class GreedyRound {
 public:
  GreedyRound(const PsiEvaluator& eval, const Budget& budget,
              const std::vector<SuperLink>& selected, double cost)
      : eval_(eval),
        budget_(budget),
        selected_(selected),
        cost_(cost),
        best_(eval.best_latencies(selected)) {
    psi_ = 0.0;
    for (int r = 0; r < eval.request_count(); ++r) {
      psi_ += eval.weight(r) * best_[r];
    }
  }

  double psi() const { return psi_; }

  std::vector<int> conflicts(const Path& path) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < selected_.size(); ++i) {
      if (paths_intersect(path, selected_[i].path)) {
        out.push_back(static_cast<int>(i));
      }
    }
    return out;
  }

  void offer(const SuperLink& sl, const std::vector<int>& evict) {
    double next_cost = cost_ + sl.cost;
    for (int i : evict) next_cost -= selected_[i].cost;
    if (!budget_.admits(cost_, next_cost)) return;
    double next_psi;
    if (evict.empty()) {
      next_psi = eval_.psi_with(best_, sl);
    } else {
      std::vector<SuperLink> kept;
      for (std::size_t i = 0; i < selected_.size(); ++i) {
        if (!std::binary_search(evict.begin(), evict.end(),
                                static_cast<int>(i))) {
          kept.push_back(selected_[i]);
        }
      }
      next_psi = eval_.psi_with(eval_.best_latencies(kept), sl);
    }
    const double gain = psi_ - next_psi;
    if (!(gain > 0.0)) return;
    const double delta = next_cost - cost_;
    const int cls = delta <= 0.0 ? 2 : 1;
    const double score = cls == 2 ? gain : gain / delta;
    if (pick_ && (cls < pick_->cls || (cls == pick_->cls && score <= pick_->score))) {
      return;
    }
    pick_ = Pick{cls, score, sl, evict, next_cost};
  }

  // Applies the best option; false when nothing improved.
  bool apply(std::vector<SuperLink>& selected, double& cost) {
    if (!pick_) return false;
    std::vector<SuperLink> next;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      if (!std::binary_search(pick_->evict.begin(), pick_->evict.end(),
                              static_cast<int>(i))) {
        next.push_back(std::move(selected[i]));
      }
    }
    next.push_back(std::move(pick_->sl));
    selected = std::move(next);
    cost = pick_->cost;
    return true;
  }

 private:
  struct Pick {
    int cls;
    double score;
    SuperLink sl;
    std::vector<int> evict;
    double cost;
  };

  const PsiEvaluator& eval_;
  const Budget& budget_;
  const std::vector<SuperLink>& selected_;
  double cost_;
  std::vector<double> best_;
  double psi_;
  std::optional<Pick> pick_;
};

bool has_endpoints(const std::vector<SuperLink>& sls, NodeId a, NodeId b) {
  return std::any_of(sls.begin(), sls.end(), [&](const SuperLink& sl) {
    return (sl.a == a && sl.b == b) || (sl.a == b && sl.b == a);
  });
}

}  // namespace

Plan generalized_greedy(const LatencyTable& table, const RequestSet& requests,
                        const Budget& budget, GreedyOptions options) {
  const PsiEvaluator eval(table, requests);
  const PhysicalParams& p = table.params();
  const Topology& topo = table.topology();
  const int n = table.node_count();

  // Update candidates never change between rounds.
  std::vector<std::optional<SuperLink>> update(static_cast<std::size_t>(n) * n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (table.direct(u, v).reachable()) update[u * n + v] = table.super_link(u, v);
    }
  }

  std::vector<SuperLink> selected;
  double cost = 0.0;
  for (;;) {
    GreedyRound round(eval, budget, selected, cost);
    std::vector<char> blocked(n, 0);
    for (const SuperLink& sl : selected) {
      for (NodeId x : sl.path) blocked[x] = 1;
    }
    for (NodeId u = 0; u < n; ++u) {
      std::optional<PathTree> residual;
      for (NodeId v = u + 1; v < n; ++v) {
        const auto& cand = update[u * n + v];
        if (!cand || has_endpoints(selected, u, v)) continue;
        const auto hit = round.conflicts(cand->path);
        if (cand->replenishes_within_slot(p) &&
            (hit.empty() || options.allow_delete)) {
          round.offer(*cand, hit);
        }
        if (options.shortest_only || hit.empty() || blocked[u] || blocked[v]) {
          continue;
        }
        if (!residual) residual = shortest_path_tree(topo, u, blocked);
        if (!residual->reachable(v)) continue;
        SuperLink detour = make_super_link(residual->path_to(v), topo, p);
        if (detour.replenishes_within_slot(p)) round.offer(detour, {});
      }
    }
    if (!round.apply(selected, cost)) break;
  }
  return make_plan(std::move(selected), requests, table);
}

std::vector<SuperLink> naive_candidates(const LatencyTable& table,
                                        const RequestSet& requests) {
  std::set<Path> seen;
  std::vector<SuperLink> out;
  for (const RequestPair& rq : requests.pairs()) {
    const Path full = table.path(rq.s, rq.d);
    for (std::size_t i = 0; i + 1 < full.size(); ++i) {
      for (std::size_t j = i + 1; j < full.size(); ++j) {
        Path sub(full.begin() + i, full.begin() + j + 1);
        if (sub.front() > sub.back()) std::reverse(sub.begin(), sub.end());
        if (!seen.insert(sub).second) continue;
        SuperLink sl = make_super_link(std::move(sub), table.topology(),
                                       table.params());
        if (sl.replenishes_within_slot(table.params())) out.push_back(std::move(sl));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SuperLink& x, const SuperLink& y) {
                     if (x.a != y.a) return x.a < y.a;
                     if (x.b != y.b) return x.b < y.b;
                     return x.path.size() < y.path.size();
                   });
  return out;
}

Plan naive_select(const LatencyTable& table, const RequestSet& requests,
                  const Budget& budget) {
  const PsiEvaluator eval(table, requests);
  const auto candidates = naive_candidates(table, requests);
  std::vector<SuperLink> selected;
  double cost = 0.0;
  for (;;) {
    GreedyRound round(eval, budget, selected, cost);
    for (const SuperLink& cand : candidates) {
      if (has_endpoints(selected, cand.a, cand.b)) continue;
      round.offer(cand, round.conflicts(cand.path));
    }
    if (!round.apply(selected, cost)) break;
  }
  return make_plan(std::move(selected), requests, table);
}

}  // namespace epdist
