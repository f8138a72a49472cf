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

#ifndef CDDSPEC_BEATNOTE_HPP
#define CDDSPEC_BEATNOTE_HPP

#include <cstddef>
#include <vector>

#include "cddspec/exec.hpp"
#include "cddspec/psd_model.hpp"

namespace cddspec {

/// Heterodyne of a laser under test (s1) against a reference (s2), detected
/// as the electrical spectrum of the photocurrent around the carrier offset.
struct BeatnoteConfig {
  PsdModel s1;            // test laser frequency-noise PSD, rad^2/Hz
  PsdModel s2;            // reference laser PSD (empty model = ideal laser)
  double omega0 = 0.0;    // carrier offset, rad/s
  double amp_product = 1.0;  // (alpha E1 E2 / 2)^2
  double tau_max = 0.0;   // coherence-envelope truncation, s
  std::size_t tau_count = 16384;
  std::vector<double> omegas;  // output spectrum grid, rad/s

  void validate() const;
};

/// exp(-(tau^2/4pi) * [2 integral_0^inf (S1+S2) sinc^2(omega tau/2) domega
///                     + 2 sum_k S_k sinc^2(omega_k tau/2)]); value in (0, 1].
double coherence_envelope(const BeatnoteConfig& cfg, double tau);

struct BeatnoteSpectrum {
  std::vector<double> omegas;
  std::vector<double> values;  // S_i(omega)
};

/// S_i(omega) = amp_product * 2 integral_0^tau_max cos((omega-omega0) tau)
/// envelope(tau) dtau, trapezoid in tau. Refuses to run when the envelope has
/// not decayed below 1e-6 at tau_max (throws with a suggested tau_max).
BeatnoteSpectrum simulate_beatnote(const BeatnoteConfig& cfg, Exec exec = Exec::kParallel);

/// Smallest tau (by doubling + bisection) where the envelope falls below
/// target (default 1e-7), for configuring tau_max.
double suggest_tau_max(const BeatnoteConfig& cfg, double target = 1e-7);

}  // namespace cddspec

#endif  // CDDSPEC_BEATNOTE_HPP
