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

// Experiment configuration, parameter sweeps, and aggregation into
// per-axis CSV tables.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "epdist/selection.hpp"
#include "epdist/simkernel.hpp"

namespace epdist {

struct ExperimentConfig {
  WaxmanOptions topology;
  int pairs = 12;
  double pair_min_km = 30.0;
  double pair_max_km = 120.0;
  PhysicalParams physical;
  double budget = 20000.0;
  bool allow_overshoot = false;
  std::vector<Algorithm> algorithms = {Algorithm::kNonSls, Algorithm::kNaive,
                                       Algorithm::kGg, Algorithm::kClus};
  int n_slots = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  // Throws std::invalid_argument naming the offending key.
  void validate() const;
  Budget budget_rule() const { return {budget, allow_overshoot}; }
};

// Reads a flat JSON object of overrides on top of `base`. Unknown keys and
// ill-typed values raise ParseError. Keys: nodes, width_km, height_km,
// max_link_km, density, pairs, pair_min_km, pair_max_km, budget,
// allow_overshoot, algorithms, n_slots, seeds, plus every PhysicalParams
// field by name (bsm_success, bsm_latency_s, photon_gen_time_s,
// photon_gen_success, optical_bsm_success, attenuation_length_km,
// signal_speed_km_s, slot_s, ttl_s, fixed_classical_s).
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base = {});
void save_config(const ExperimentConfig& config,
                 const std::filesystem::path& path);

struct Instance {
  Topology topology;
  RequestSet requests;
};

// Topology and request set for one seed. Every algorithm evaluated on the
// same seed sees the same instance.
Instance build_instance(const ExperimentConfig& config, std::uint64_t seed);

enum class SweepAxis { kBudget, kDensity, kNodes, kPairs };

std::string_view axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);
ExperimentConfig with_axis(ExperimentConfig config, SweepAxis axis, double x);

struct AxisValues {
  SweepAxis axis = SweepAxis::kBudget;
  std::vector<double> values;
};

struct SweepRow {
  std::string axis;
  double x = 0.0;
  std::string algorithm;
  std::uint64_t seed = 0;
  double psi_s = 0.0;
  double total_cost = 0.0;
  int sl_count = 0;
  bool flagged = false;
  bool plan_ok = false;     // plan_violations() was empty
  bool eps_balanced = false;
  int served = 0;
  int timeouts = 0;
  double avg_latency_s = 0.0;
  double max_latency_s = 0.0;
  double sl_aggregate_latency_s = 0.0;
  double mean_sl_eps_consumed = 0.0;
  std::uint64_t link_attempts = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

// Plans and simulates every configured algorithm on one (config, seed).
std::vector<SweepRow> run_cell(const ExperimentConfig& config,
                               std::string_view axis, double x,
                               std::uint64_t seed);

// One axis at a time, every value x seed x algorithm. Cells run on up to
// `workers` threads; row order does not depend on the worker count.
std::vector<SweepRow> sweep(const ExperimentConfig& base,
                            const std::vector<AxisValues>& axes, int workers);

// Fixed column order: axis, x, algorithm, seed, psi_s, total_cost, sl_count,
// flagged, plan_ok, eps_balanced, served, timeouts, avg_latency_s,
// max_latency_s, sl_aggregate_latency_s, mean_sl_eps_consumed,
// link_attempts.
void write_rows(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_rows(std::istream& in);

struct AggregateRow {
  std::string axis;
  double x = 0.0;
  std::string algorithm;
  int samples = 0;
  double mean_avg_latency_s = 0.0;
  double mean_max_latency_s = 0.0;
  double mean_sl_aggregate_latency_s = 0.0;
  double stddev = 0.0;  // sample stddev of avg_latency_s; 0 for one sample
};

// Groups by (axis, x, algorithm) in first-appearance order. Throws
// std::invalid_argument on empty input.
std::vector<AggregateRow> analyze(const std::vector<SweepRow>& rows);

// Columns: x, algorithm, mean_avg_latency_s, mean_max_latency_s,
// mean_sl_aggregate_latency_s, stddev.
void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows);

// Writes <dir>/<axis>.csv for every axis present; returns the files written.
std::vector<std::filesystem::path> write_figures(
    const std::vector<AggregateRow>& rows, const std::filesystem::path& dir);

}  // namespace epdist
