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

// Fixtures and reference computations shared by the unit and acceptance
// tests. The oracles here deliberately avoid the library's own recursions.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "epdist/latency.hpp"
#include "epdist/topology.hpp"

namespace epdist::testing {

// Nodes on the x axis at the given positions, consecutive nodes linked.
inline Topology line_topology(const std::vector<double>& xs) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (int i = 0; i < static_cast<int>(xs.size()); ++i) {
    nodes.push_back({i, xs[i], 0.0});
    if (i > 0) edges.push_back({i - 1, i, xs[i] - xs[i - 1]});
  }
  return Topology(std::move(nodes), std::move(edges));
}

inline Topology even_line(int n, double spacing_km) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(i * spacing_km);
  return line_topology(xs);
}

// Probability that one heralded attempt over `d` km succeeds, written out
// from the physical constants.
inline double attempt_success(double d, const PhysicalParams& p) {
  return std::pow(p.photon_gen_success, 2) * p.optical_bsm_success *
         std::exp(-d / (2.0 * p.attenuation_length_km));
}

inline double attempt_period(double d, const PhysicalParams& p) {
  return p.photon_gen_time_s + d / p.signal_speed_km_s;
}

// Minimum root latency over every binary tree shape on links [lo, hi) of a
// path, by plain recursion. `link[i]` is the latency of link i, `xs` the node
// positions on a line.
inline double exhaustive_tree_latency(const std::vector<double>& link,
                                      const std::vector<double>& xs, int lo,
                                      int hi, const PhysicalParams& p) {
  if (hi - lo == 1) return link[lo];
  double best = std::numeric_limits<double>::infinity();
  for (int k = lo + 1; k < hi; ++k) {
    const double l = exhaustive_tree_latency(link, xs, lo, k, p);
    const double r = exhaustive_tree_latency(link, xs, k, hi, p);
    const double tc =
        std::max(std::abs(xs[k] - xs[lo]), std::abs(xs[hi] - xs[k])) /
        p.signal_speed_km_s;
    best = std::min(best,
                    (1.5 * std::max(l, r) + p.bsm_latency_s + tc) /
                        p.bsm_success);
  }
  return best;
}

// Number of binary tree shapes over m leaves (Catalan number C_{m-1}).
inline int tree_shape_count(int m) {
  if (m <= 1) return 1;
  int total = 0;
  for (int k = 1; k < m; ++k) total += tree_shape_count(k) * tree_shape_count(m - k);
  return total;
}

// Sampled link attempts to deliver one EP over a tree: every failed swap
// throws away both subtrees, which then start over.
class AttemptSampler {
 public:
  AttemptSampler(const SwappingTree& tree, std::vector<double> success,
                 double p_b, std::uint64_t seed)
      : tree_(tree), success_(std::move(success)), p_b_(p_b), gen_(seed) {}

  double sample() { return run(0); }

 private:
  double run(int v) {
    const SwappingTree::Vertex& x = tree_.vertices()[v];
    if (x.is_leaf()) {
      std::geometric_distribution<long> g(success_[x.lo]);
      return static_cast<double>(g(gen_) + 1);
    }
    std::bernoulli_distribution swap(p_b_);
    double total = 0.0;
    do {
      total += run(x.left) + run(x.right);
    } while (!swap(gen_));
    return total;
  }

  const SwappingTree& tree_;
  std::vector<double> success_;
  double p_b_;
  std::mt19937_64 gen_;
};

// E[max(X, Y)] for X, Y independent geometric on {1, 2, ...} with success q.
inline double expected_max_geometric(double q) {
  return 2.0 / q - 1.0 / (1.0 - (1.0 - q) * (1.0 - q));
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("epdist_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace epdist::testing
