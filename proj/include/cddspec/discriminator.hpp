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

#ifndef CDDSPEC_DISCRIMINATOR_HPP
#define CDDSPEC_DISCRIMINATOR_HPP

#include <cstdint>
#include <vector>

#include "cddspec/psd_model.hpp"

namespace cddspec {

/// Bohr magneton over hbar, rad/(s T).
inline constexpr double kMuBOverHbar = 9.2740100783e-24 / 1.054571817e-34;

/// A Zeeman transition between an S_1/2 ground sublevel m_s and a D_5/2
/// excited sublevel m_d.
struct ZeemanTransition {
  double m_s = -0.5;
  double m_d = -0.5;
  double g_s = 2.0;
  double g_d = 1.2;

  void validate() const;
};

/// Dimensionless magnetic sensitivity k = g_d m' - g_s m.
double sensitivity(const ZeemanTransition& tr);

struct DiscriminationResult {
  PsdModel s_laser;                      // rad^2/Hz
  PsdModel s_magnetic;                   // T^2/Hz
  std::vector<std::uint8_t> clamped_laser;     // negative values clamped to 0
  std::vector<std::uint8_t> clamped_magnetic;
};

/// Pointwise inversion of the linear mixing on the union of both grids:
///   S_dB = (S_13 - S_12) / ((k13^2 - k12^2) (muB/hbar)^2)
///   S_L  = S_12 - (S_13 - S_12) k12^2 / (k13^2 - k12^2)
/// With the default transitions this is the printed
/// hbar^2/(24 x 0.16 muB^2) and S_12 - (S_13 - S_12)/24 algebra. Negative
/// results of fitting noise are clamped to zero and flagged.
DiscriminationResult discriminate(const PsdModel& s13, const PsdModel& s12,
                                  const ZeemanTransition& tr13 = {-0.5, -2.5},
                                  const ZeemanTransition& tr12 = {-0.5, -0.5});

/// Forward map: S_tr = S_L + k^2 (muB/hbar)^2 S_dB on the laser grid (the
/// magnetic PSD is interpolated). Laser tones carry over unchanged.
PsdModel compose_transition_psd(const PsdModel& s_laser, const PsdModel& s_magnetic,
                                const ZeemanTransition& tr);

}  // namespace cddspec

#endif  // CDDSPEC_DISCRIMINATOR_HPP
