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

#ifndef CDDSPEC_NOISE_SYNTH_HPP
#define CDDSPEC_NOISE_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cddspec/psd_model.hpp"

namespace cddspec {

/// One realization of the stationary zero-mean Gaussian detuning process
/// (rad/s), sampled at spacing dt, plus any coherent tones.
struct NoiseTrajectory {
  double dt = 0.0;              // seconds
  std::vector<double> samples;  // f(t_k), rad/s
  std::uint64_t seed = 0;

  void validate() const;
  double duration() const { return dt * static_cast<double>(samples.size() - 1); }
};

struct SynthOptions {
  /// When true (default), each tone's phase is drawn uniformly in [0, 2pi)
  /// from the trajectory's seed stream; when false the tone's phi0 is used
  /// verbatim (deterministic-tone tests).
  bool randomize_tone_phase = true;
};

/// Spectral-method synthesis: independent complex Gaussian amplitudes per
/// frequency bin with variance set by S(omega_k), Hermitian symmetry, inverse
/// FFT. Internally generates 2n samples on the circle and returns the first n
/// to suppress periodicity artifacts. Deterministic for fixed
/// (psd, dt, n, seed).
///
/// Bin-variance calibration: <|F_m|^2> = N * S(|omega_m|) / (2 dt), which
/// makes a flat one-sided level S_w come back out of estimate_psd as S_w and
/// gives the closed-loop white-noise decay rate S_w/2.
NoiseTrajectory synthesize(const PsdModel& psd, double dt, std::size_t n, std::uint64_t seed,
                           const SynthOptions& opts = {});

/// Welch averaged periodogram (Hann window, 50% overlap), normalized so a
/// flat input level S_w is recovered as S_w in PsdModel units. Grid spans
/// [0, pi/dt] with spacing 2*pi/(segment_len*dt).
PsdModel estimate_psd(const NoiseTrajectory& traj, std::size_t segment_len);

/// Biased autocorrelation estimate C(k) = (1/N) sum_j f_j f_{j+k},
/// k = 0..max_lag. C(0) is the sample mean square.
std::vector<double> autocorrelation(const NoiseTrajectory& traj, std::size_t max_lag);

}  // namespace cddspec

#endif  // CDDSPEC_NOISE_SYNTH_HPP
