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

#ifndef CDDSPEC_LLN_MODEL_HPP
#define CDDSPEC_LLN_MODEL_HPP

#include <string>
#include <vector>

#include "cddspec/psd_model.hpp"
#include "cddspec/qubit_sim_types.hpp"

namespace cddspec {

/// Decay description in the basis tilted by eta = atan2(omega_lln, delta)
/// from the drive axis; gamma1_tilde/gamma2_tilde are the longitudinal and
/// transverse relaxation rates of that basis.
struct DressedRates {
  double eta = 0.0;           // tilt angle, rad
  double omega_r = 0.0;       // effective precession frequency, rad/s
  double gamma1_tilde = 0.0;  // 1/s
  double gamma2_tilde = 0.0;  // 1/s
  // Inputs the tilde rates were built from.
  double gamma1 = 0.0;
  double gamma_phi = 0.0;
  double gamma_v = 0.0;
};

/// gamma1_tilde = (1 + cos^2 eta)/2 gamma1 + gamma_v sin^2 eta,
/// gamma2_tilde = gamma1_tilde/2 + gamma_phi_tilde with
/// gamma_phi_tilde = gamma1 sin^2(eta)/2 + gamma_phi cos^2(eta).
/// Exactly linear in (gamma1, gamma_phi, gamma_v).
DressedRates dressed_rates(double gamma1, double gamma_phi, double gamma_v, double omega_lln,
                           double delta);

/// +X survival of an initial +X state decomposed along/perpendicular to the
/// tilted field axis:
///   P_s(t) = 1/2 + 1/2 [cos^2(eta) e^(-G1t t) + sin^2(eta) e^(-G2t t) cos(Omega_R t)].
/// eta and Omega_R are recomputed from (tone, drive omega); the rates'
/// tilde values are used as given.
std::vector<double> lln_decay_model(const LlnTone& tone, double drive_omega,
                                    const DressedRates& rates, const std::vector<double>& times);

struct LlnFitOptions {
  /// Rates gamma_v is assumed zero when inverting gamma1_tilde into S(Omega);
  /// when false, recovered S values are flagged as upper bounds instead.
  bool gamma_v_zero = true;
  /// Curves with reduced chi^2 above this gate are excluded from pooling.
  double chi2_red_gate = 4.0;
};

struct LlnCurveFit {
  double drive_omega = 0.0;
  double omega0 = 0.0, omega0_sigma = 0.0;
  double omega_lln = 0.0, omega_lln_sigma = 0.0;
  double gamma1_tilde = 0.0, gamma1_tilde_sigma = 0.0;
  double gamma2_tilde = 0.0, gamma2_tilde_sigma = 0.0;
  double s_omega = 0.0;  // background S(Omega) = 2 gamma1 from inverting the tilde rates
  bool s_is_upper_bound = false;
  double chi2_red = 0.0;
  bool converged = false;
  bool excluded = false;
  std::string message;
};

struct LlnFitReport {
  std::vector<LlnCurveFit> curves;
  double omega0 = 0.0, omega0_sigma = 0.0;        // inverse-variance pooled
  double omega_lln = 0.0, omega_lln_sigma = 0.0;  // inverse-variance pooled
  /// Tone strength conventions: the delta weight pi E0^2 (= 4 pi omega_lln^2)
  /// and the alternative pi omega_lln^2 reading.
  double s_pi_e0_sq = 0.0;
  double s_pi_omega_lln_sq = 0.0;
  std::size_t n_used = 0;
};

/// Per-curve weighted nonlinear least squares of lln_decay_model in
/// (delta, omega_lln, gamma1_tilde, gamma2_tilde), both detuning signs tried,
/// followed by inverse-variance pooling of (omega0, omega_lln) over curves
/// passing the reduced-chi^2 gate. Curves must bracket the tone and show at
/// least two oscillation periods.
LlnFitReport fit_lln(const std::vector<DecayCurve>& curves, const LlnFitOptions& opts = {});

}  // namespace cddspec

#endif  // CDDSPEC_LLN_MODEL_HPP
