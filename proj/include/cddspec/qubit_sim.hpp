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

#ifndef CDDSPEC_QUBIT_SIM_HPP
#define CDDSPEC_QUBIT_SIM_HPP

#include <cstdint>
#include <vector>

#include "cddspec/exec.hpp"
#include "cddspec/noise_synth.hpp"
#include "cddspec/psd_model.hpp"
#include "cddspec/qubit_sim_types.hpp"

namespace cddspec {

/// Reference frame for the stochastic propagation.
///  - kRotating: drive frame, H = f(t)[cos(Omega t) sz + sin(Omega t) sy]/2
///    (+ delta-Omega(t) sx/2 when drive noise is present).
///  - kLlnInteraction: laser frame, H = (Omega + dOmega(t)) sx/2 + f(t) sz/2.
/// Both frames agree on <sx>, which is what the survival probability reads.
enum class Frame {
  kRotating,
  kLlnInteraction,
};

/// Piecewise-constant propagation with exact axis-angle rotations per step,
/// starting from +X. The noise sample f_k is held over [k dt, (k+1) dt); the
/// drive phase is evaluated at each sub-step midpoint. Norm is preserved to
/// rounding. Requested times are hit exactly via partial steps.
std::vector<BlochState> evolve_one(const NoiseTrajectory& traj, const DriveConfig& drive,
                                   Frame frame, const NoiseTrajectory* drive_noise = nullptr);

struct McOptions {
  Frame frame = Frame::kRotating;
  /// Shots per point for binomial readout sampling; 0 keeps the ensemble
  /// mean with stderr = sample std / sqrt(n_traj).
  int n_shots = 0;
  /// Sampling density: dt = 2pi / (points_per_period * omega_fast).
  double points_per_period = 20.0;
  /// Explicit dt, bypassing the density rule (still precondition-checked).
  double dt_override = 0.0;
  Exec exec = Exec::kParallel;
};

/// Ensemble survival probability on the Stark-rotated +X readout axis:
/// P_k(t_j) = (1 + x cos(delta_A t_j) + y sin(delta_A t_j)) / 2, averaged
/// over n_traj independent trajectories (seed stream = seed + index). The
/// reduction is an ordered fold, so serial and parallel execution are
/// bit-identical.
DecayCurve monte_carlo_decay(const PsdModel& psd, const DriveConfig& drive, std::size_t n_traj,
                             std::uint64_t seed, const McOptions& opts = {});

}  // namespace cddspec

#endif  // CDDSPEC_QUBIT_SIM_HPP
