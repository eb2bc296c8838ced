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

#include <optional>
#include <stdexcept>
#include <string>

namespace epdist {

// Raised when an input is well-formed but cannot be satisfied (e.g. a
// topology that cannot reach the requested density). Maps to exit code 2.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files. Also exit code 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Homogeneous physical constants shared by every node and link. Times are in
// seconds, distances in km.
struct PhysicalParams {
  double bsm_success = 0.4;           // atomic BSM success probability
  double bsm_latency_s = 10e-6;       // atomic BSM duration
  double photon_gen_time_s = 50e-6;   // atom-photon generation time
  double photon_gen_success = 0.33;   // atom-photon generation success
  double optical_bsm_success = 0.2;   // optical BSM success (half of atomic)
  double attenuation_length_km = 20.0;
  double signal_speed_km_s = 2e5;     // fiber, both classical and photonic
  double slot_s = 4.0;                // request slot length
  std::optional<double> ttl_s;        // memory cutoff; unset = infinite
  // Overrides the distance-derived classical notification delay of a swap.
  std::optional<double> fixed_classical_s;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Classical delay of one swap whose farthest endpoint is `distance_km`
  // away from the swapping node.
  double classical_delay(double distance_km) const {
    return fixed_classical_s ? *fixed_classical_s
                             : distance_km / signal_speed_km_s;
  }
};

}  // namespace epdist
