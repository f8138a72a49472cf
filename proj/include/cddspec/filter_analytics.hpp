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

#ifndef CDDSPEC_FILTER_ANALYTICS_HPP
#define CDDSPEC_FILTER_ANALYTICS_HPP

#include <cstdint>
#include <vector>

#include "cddspec/psd_model.hpp"
#include "cddspec/qubit_sim_types.hpp"

namespace cddspec {

/// Arguments of the continuous-drive filter function.
struct FilterSpec {
  double omega_drive = 0.0;  // Rabi frequency, rad/s
  double t = 0.0;            // evolution time, s
};

double sinc(double x);

/// integral_a^inf sinc^2(u) du for a >> 1 (asymptotic Si expansion).
double sinc_sq_integral_tail(double a);

/// F(omega, Omega, t) = t^2 [sinc^2((omega+Omega)t/2) + sinc^2((omega-Omega)t/2)] / (4 pi).
/// Narrow lobes at omega = +-Omega; the dominant lobe has equivalent width
/// 2pi/t (and literal half-max width 0.8859 * 2pi/t).
double filter_function(double omega, const FilterSpec& spec);

struct QuadOptions {
  /// Trapezoid node spacing is 2pi/t divided by this (>= 10 to resolve the
  /// sinc^2 oscillation everywhere on the integration domain).
  double points_per_lobe = 32.0;
  /// Integration extends to Omega + this many lobes; the remainder is added
  /// as an averaged-envelope analytic tail using the boundary PSD value.
  double lobes_past_peak = 240.0;
};

/// chi(t) = integral_0^inf S(omega) F(omega, Omega, t) domega by trapezoid
/// quadrature on the union of a fine uniform grid and the PSD grid, plus
/// analytic tail, plus tone deltas S_k * F(omega_k).
double chi_integral(const PsdModel& psd, double omega_drive, double t, const QuadOptions& opts = {});

/// Quadrature weights w_i of each PSD grid node against F(., Omega, t),
/// including the linear-interpolation hat support and flat extrapolation, so
/// that chi == dot(weights, psd.values) exactly for smooth (tone-free) input.
std::vector<double> filter_weights(const std::vector<double>& grid, double omega_drive, double t,
                                   const QuadOptions& opts = {});

struct PredictedDecay {
  DecayCurve curve;               // stderr = 0, n_traj = 0
  std::vector<double> chi;        // decoherence exponent per time
  std::vector<std::uint8_t> deep_decay;  // chi > 5: second-cumulant form unreliable
};

/// P_so(t) = 1/2 + 1/2 cos(delta_a t) exp(-chi(t)).
PredictedDecay predict_decay(const PsdModel& psd, double omega_drive,
                             const std::vector<double>& times, double delta_a,
                             const QuadOptions& opts = {});

}  // namespace cddspec

#endif  // CDDSPEC_FILTER_ANALYTICS_HPP
