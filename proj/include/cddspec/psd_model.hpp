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

#ifndef CDDSPEC_PSD_MODEL_HPP
#define CDDSPEC_PSD_MODEL_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace cddspec {

/// A strong discrete noise tone, parametrized by its equivalent resonant
/// Rabi frequency omega_lln = E0/2 (E0 is the tone amplitude in rad/s).
struct LlnTone {
  double omega0 = 0.0;     // center angular frequency, rad/s
  double omega_lln = 0.0;  // E0/2, rad/s
  double phi0 = 0.0;       // initial phase, rad
};

/// Delta weight of a random-phase tone in the convention below:
/// S_k = pi E0^2 / 2 = 2 pi omega_lln^2, the coefficient of
/// delta(omega - omega0) that reproduces the tone's second-order decoherence
/// and beat-note sidebands exactly.
double tone_delta_weight(const LlnTone& tone);

/// Power spectral density sampled on an ascending angular-frequency grid,
/// linearly interpolated, flat-extrapolated outside the grid. Values are in
/// rad^2/Hz and follow the symmetric-density convention read on omega >= 0:
/// a flat level S_w drives a qubit decay exp(-S_w t / 2) and a beat-note
/// coherence decay exp(-S_w tau / 2); total process power is
/// (1/pi) integral_0^inf S(omega) domega. Coherent tones ride along as delta
/// components excluded from the smooth grid.
struct PsdModel {
  std::vector<double> grid;    // omega_i, rad/s, strictly ascending, >= 0
  std::vector<double> values;  // S(omega_i) >= 0
  std::string interpolation = "linear";
  std::vector<LlnTone> tones;

  /// Throws std::invalid_argument on any broken invariant.
  void validate() const;

  /// Linear interpolation inside the grid, boundary value outside.
  double evaluate(double omega) const;

  bool empty() const { return grid.empty(); }

  /// Flat spectrum helper: S = level over [omega_lo, omega_hi].
  static PsdModel flat(double level, double omega_lo, double omega_hi);
};

}  // namespace cddspec

#endif  // CDDSPEC_PSD_MODEL_HPP
