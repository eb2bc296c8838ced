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

#include "epdist/plan_io.hpp"

#include <fmt/format.h>

#include "json_util.hpp"

namespace epdist {

using detail::json;

void save_plan(const Plan& plan, const std::filesystem::path& path) {
  json doc;
  doc["sls"] = json::array();
  for (const SuperLink& sl : plan.sls) {
    doc["sls"].push_back({{"A", sl.a},
                          {"B", sl.b},
                          {"path", sl.path},
                          {"ep_latency_s", sl.ep_latency_s},
                          {"cost", sl.cost},
                          {"stock_target", sl.stock_target}});
  }
  doc["assignment"] = json::array();
  for (const AssignmentEntry& e : plan.assignment) {
    json j = {{"s", e.s}, {"d", e.d}, {"shape", shape_name(e.shape)}};
    if (e.sl < 0) {
      j["sl"] = "direct";
    } else {
      j["sl"] = e.sl;
      j["near"] = e.near;
      j["far"] = e.far;
      j["to_sl"] = e.to_sl;
      j["from_sl"] = e.from_sl;
    }
    if (e.latency.reachable()) {
      j["latency_s"] = e.latency.seconds();
    } else {
      j["latency_s"] = nullptr;
    }
    doc["assignment"].push_back(std::move(j));
  }
  doc["psi_s"] = plan.psi_s;
  doc["total_cost"] = plan.total_cost;
  doc["flagged"] = plan.flagged;
  doc["note"] = plan.note;
  detail::write_json_file(doc, path);
}

Plan load_plan(const std::filesystem::path& path, const Topology& topo,
               const PhysicalParams& params) {
  using detail::field;
  const json doc = detail::read_json_file(path);
  const std::string where = path.string();
  Plan plan;
  const json& jsls = detail::array_field(doc, "sls", where);
  for (std::size_t i = 0; i < jsls.size(); ++i) {
    const std::string at = fmt::format("{}: sls[{}]", where, i);
    auto nodes = field<std::vector<NodeId>>(jsls[i], "path", at);
    SuperLink sl;
    try {
      sl = make_super_link(std::move(nodes), topo, params);
    } catch (const std::invalid_argument& e) {
      throw ParseError(at + ": " + e.what());
    }
    if (sl.a != field<NodeId>(jsls[i], "A", at) ||
        sl.b != field<NodeId>(jsls[i], "B", at)) {
      throw ParseError(at + ": endpoints do not match the path");
    }
    plan.total_cost += sl.cost;
    plan.sls.push_back(std::move(sl));
  }
  const json& jas = detail::array_field(doc, "assignment", where);
  for (std::size_t i = 0; i < jas.size(); ++i) {
    const std::string at = fmt::format("{}: assignment[{}]", where, i);
    AssignmentEntry e;
    e.s = field<NodeId>(jas[i], "s", at);
    e.d = field<NodeId>(jas[i], "d", at);
    try {
      e.shape = parse_shape(field<std::string>(jas[i], "shape", at));
    } catch (const std::invalid_argument& ex) {
      throw ParseError(at + ": " + ex.what());
    }
    const json& jsl = jas[i].contains("sl") ? jas[i]["sl"] : json();
    if (jsl.is_string() && jsl.get<std::string>() == "direct") {
      e.sl = -1;
      e.shape = Shape::kDirect;
    } else if (jsl.is_number_integer()) {
      e.sl = jsl.get<int>();
      if (e.sl < 0 || e.sl >= static_cast<int>(plan.sls.size())) {
        throw ParseError(at + ".sl: index out of range");
      }
      e.near = field<NodeId>(jas[i], "near", at);
      e.far = field<NodeId>(jas[i], "far", at);
      e.to_sl = field<Path>(jas[i], "to_sl", at);
      e.from_sl = field<Path>(jas[i], "from_sl", at);
    } else {
      throw ParseError(at + ".sl: expected an index or \"direct\"");
    }
    if (jas[i].contains("latency_s") && jas[i]["latency_s"].is_number()) {
      e.latency = Latency::of(jas[i]["latency_s"].get<double>());
    }
    plan.assignment.push_back(std::move(e));
  }
  plan.psi_s = field<double>(doc, "psi_s", where);
  if (doc.contains("flagged")) plan.flagged = field<bool>(doc, "flagged", where);
  if (doc.contains("note")) plan.note = field<std::string>(doc, "note", where);
  return plan;
}

}  // namespace epdist
