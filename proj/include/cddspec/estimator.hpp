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

#ifndef CDDSPEC_ESTIMATOR_HPP
#define CDDSPEC_ESTIMATOR_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "cddspec/exec.hpp"
#include "cddspec/filter_analytics.hpp"
#include "cddspec/psd_model.hpp"
#include "cddspec/qubit_sim_types.hpp"

namespace cddspec {

enum class RectStatus {
  kOk,
  kNonconvergence,
  kToneContamination,
};

struct RectangularFit {
  double s = 0.0, s_sigma = 0.0;              // S(Omega), same units as PsdModel
  double delta_a = 0.0, delta_a_sigma = 0.0;  // rad/s
  double chi2_red = 0.0;
  RectStatus status = RectStatus::kOk;
  std::string message;
};

/// Weighted least squares of P = 1/2 + 1/2 cos(delta_a t) exp(-S t / 2) with
/// S constrained >= 0. Curves a strong tone has pushed systematically below
/// the model's lower envelope are rejected as tone-contaminated (they belong
/// to the LLN fitter).
RectangularFit rectangular_estimate(const DecayCurve& curve);

struct RefineHyper {
  double tol = 1e-6;        // stop when relative J improvement drops below
  int max_iter = 2000;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  bool project_nonneg = true;
  /// Discrepancy-principle stop: halt once J falls to the statistical floor
  /// noise_floor_scale * sum(stderr^2); descending further only fits shot
  /// noise into the spectrum. Negative disables; curves without stderr are
  /// unaffected either way.
  double noise_floor_scale = 1.0;
};

/// Eq.-style reconstruction problem: one decay curve per drive frequency,
/// a target grid for S'(omega), per-curve frozen delta_a, and precomputed
/// filter weight matrices so that chi_j = W_c S + chi_tones is exact in S.
struct ReconstructionProblem {
  std::vector<DecayCurve> curves;
  std::vector<double> delta_a;  // frozen per curve
  std::vector<double> grid;
  PsdModel init;
  RefineHyper hyper;
  std::vector<LlnTone> fixed_tones;  // analytic delta contributions, held fixed
  Exec exec = Exec::kParallel;

  // Filled by build(): weights[c][j] is the row over grid nodes; chi0[c][j]
  // the fixed tone contribution.
  std::vector<std::vector<std::vector<double>>> weights;
  std::vector<std::vector<double>> chi0;

  static ReconstructionProblem build(std::vector<DecayCurve> curves, std::vector<double> delta_a,
                                     std::vector<double> grid, PsdModel init,
                                     RefineHyper hyper = {}, std::vector<LlnTone> tones = {},
                                     const QuadOptions& quad = {});
};

struct ObjectiveEval {
  double j = 0.0;
  std::vector<std::vector<double>> residuals;  // per curve: P'(t) - P(t)
};

/// J = sum over curves and time points of (P(t_j) - P'(t_j))^2 with
/// P'(t_j) = 1/2 + 1/2 cos(delta_a t_j) exp(-chi_j(S)).
ObjectiveEval objective(const ReconstructionProblem& problem, const std::vector<double>& s);

/// Analytic gradient dJ/dS(omega_i) = sum 2 (P' - P) (-1/2) cos(delta_a t)
/// e^(-chi) w_i(t); exact for the discretized chi, so it matches finite
/// differences of objective() to roundoff.
std::vector<double> gradient_of_objective(const ReconstructionProblem& problem,
                                          const std::vector<double>& s);

struct IterLogEntry {
  int iter = 0;
  double j = 0.0;
  double step = 0.0;
};

enum class RefineStatus {
  kConverged,
  kMaxIterations,
  kLineSearchFailed,
};

struct RefineResult {
  PsdModel s;
  std::vector<IterLogEntry> log;
  RefineStatus status = RefineStatus::kConverged;
  std::string message;
};

/// Projected gradient descent (clamp S >= 0) with backtracking Armijo line
/// search; J is non-increasing along the returned log.
RefineResult gradient_refine(const ReconstructionProblem& problem);

/// Logarithmic spacing below log_knee, linear spacing pi/t_max above; the
/// grid spans [omega_lo, omega_hi] inclusive.
std::vector<double> make_reconstruction_grid(double omega_lo, double omega_hi, double t_max,
                                             double log_knee = 2.0 * 3.14159265358979323846 * 2e3,
                                             std::size_t log_points_per_decade = 6);

/// Remove grid nodes within +-3 * (2 pi / t_ref) of any tone center.
std::vector<double> mask_tones(const std::vector<double>& grid, const std::vector<LlnTone>& tones,
                               double t_ref);

}  // namespace cddspec

#endif  // CDDSPEC_ESTIMATOR_HPP
