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

#pragma once

#include <filesystem>

#include "epdist/selection.hpp"

namespace epdist {

// JSON plan file:
//   {"sls": [{"A", "B", "path", "ep_latency_s", "cost", "stock_target"}],
//    "assignment": [{"s", "d", "sl": index | "direct", "shape", "near",
//                    "far", "to_sl", "from_sl", "latency_s"}],
//    "psi_s", "total_cost", "flagged", "note"}
void save_plan(const Plan& plan, const std::filesystem::path& path);

// Rebuilds each super-link's swapping tree from its path. Throws ParseError
// when the file is malformed or does not fit `topo`.
Plan load_plan(const std::filesystem::path& path, const Topology& topo,
               const PhysicalParams& params);

}  // namespace epdist
