// Copyright 2026 The cddspec Authors
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

#ifndef CDDSPEC_QUBIT_SIM_TYPES_HPP
#define CDDSPEC_QUBIT_SIM_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "cddspec/psd_model.hpp"

namespace cddspec {

struct BlochState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Drive settings for one decay measurement.
struct DriveConfig {
  double omega = 0.0;        // Rabi frequency, rad/s
  double stark_shift = 0.0;  // delta_A, rad/s (readout-frame rotation rate)
  std::optional<PsdModel> drive_noise;  // PSD of Rabi-frequency noise, off by default
  std::vector<double> times;            // ascending evolution times, s

  /// require_positive_omega: the full decay experiment needs a drive; bare
  /// free-precession propagation (omega = 0) is allowed for evolve_one.
  void validate(bool require_positive_omega) const;
};

/// Survival probability P_s(t) at fixed drive, with per-point standard error.
struct DecayCurve {
  double omega = 0.0;  // Rabi frequency the curve was taken at, rad/s
  std::vector<double> times;
  std::vector<double> p_s;
  std::vector<double> stderr_;
  std::size_t n_traj = 0;

  void validate() const;
};

}  // namespace cddspec

#endif  // CDDSPEC_QUBIT_SIM_TYPES_HPP
