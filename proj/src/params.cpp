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

#include "epdist/params.hpp"

#include <cmath>

namespace epdist {
namespace {

void require_probability(double p, const char* name) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) +
                                " must be a probability in (0, 1], got " +
                                std::to_string(p));
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) +
                                " must be positive and finite, got " +
                                std::to_string(v));
  }
}

}  // namespace

void PhysicalParams::validate() const {
  require_probability(bsm_success, "bsm_success");
  require_probability(photon_gen_success, "photon_gen_success");
  require_probability(optical_bsm_success, "optical_bsm_success");
  if (optical_bsm_success > bsm_success) {
    throw std::invalid_argument(
        "optical_bsm_success must not exceed bsm_success");
  }
  // Zero is allowed for idealized checks; negative never is.
  if (!(bsm_latency_s >= 0.0) || !std::isfinite(bsm_latency_s)) {
    throw std::invalid_argument("bsm_latency_s must be non-negative");
  }
  require_positive(photon_gen_time_s, "photon_gen_time_s");
  require_positive(attenuation_length_km, "attenuation_length_km");
  require_positive(signal_speed_km_s, "signal_speed_km_s");
  require_positive(slot_s, "slot_s");
  if (ttl_s) require_positive(*ttl_s, "ttl_s");
  if (fixed_classical_s && !(*fixed_classical_s >= 0.0)) {
    throw std::invalid_argument("fixed_classical_s must be non-negative");
  }
}

}  // namespace epdist
