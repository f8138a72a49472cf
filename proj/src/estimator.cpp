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

#include "cddspec/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "cddspec/levmar.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cddspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double dominant_delta_a(const std::vector<double>& times, const std::vector<double>& p) {
  const double span = times.back() - times.front();
  double min_dt = span;
  for (std::size_t j = 1; j < times.size(); ++j) min_dt = std::min(min_dt, times[j] - times[j - 1]);
  double mean = 0.0;
  for (double v : p) mean += v;
  mean /= static_cast<double>(p.size());

  const double w_lo = kTwoPi / (4.0 * span);
  const double w_hi = 0.9 * kPi / min_dt;
  double best_w = 0.0, best_a = 0.0;
  const std::size_t n_scan = 600;
  for (std::size_t i = 0; i < n_scan; ++i) {
    const double w = w_lo + (w_hi - w_lo) * static_cast<double>(i) / static_cast<double>(n_scan - 1);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < times.size(); ++j) {
      acc += (p[j] - mean) * std::exp(std::complex<double>(0.0, -w * times[j]));
    }
    if (std::norm(acc) > best_a) {
      best_a = std::norm(acc);
      best_w = w;
    }
  }
  return best_w;
}

double envelope_decay_init(const std::vector<double>& times, const std::vector<double>& p,
                           double delta_a) {
  // Windowed max of |2P-1| decays like exp(-S t / 2).
  const double period = delta_a > 0.0 ? kTwoPi / delta_a : (times.back() - times.front()) / 4.0;
  std::vector<double> tw, lm;
  double w_start = times.front(), peak = 0.0;
  bool any = false;
  for (std::size_t j = 0; j <= times.size(); ++j) {
    const bool flush = (j == times.size()) || (times[j] >= w_start + period);
    if (flush && any && peak > 1e-9) {
      tw.push_back(w_start + 0.5 * period);
      lm.push_back(std::log(std::min(peak, 1.0)));
      peak = 0.0;
      any = false;
      if (j < times.size()) w_start = times[j];
    }
    if (j < times.size()) {
      peak = std::max(peak, std::abs(2.0 * p[j] - 1.0));
      any = true;
    }
  }
  if (tw.size() < 2) return 1.0 / (times.back() - times.front());
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  const double nn = static_cast<double>(tw.size());
  for (std::size_t j = 0; j < tw.size(); ++j) {
    st += tw[j];
    sl += lm[j];
    stt += tw[j] * tw[j];
    stl += tw[j] * lm[j];
  }
  const double denom = nn * stt - st * st;
  if (std::abs(denom) < 1e-30) return 1.0 / (times.back() - times.front());
  const double slope = (nn * stl - st * sl) / denom;
  return std::max(-2.0 * slope, 1e-3 / (times.back() - times.front()));
}

}  // namespace

RectangularFit rectangular_estimate(const DecayCurve& curve) {
  curve.validate();
  RectangularFit fit;
  const std::size_t n = curve.times.size();
  if (n < 6) throw std::invalid_argument("rectangular_estimate: need at least 6 points");

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = curve.stderr_[j] > 0.0 ? curve.stderr_[j] : 1.0;

  const double delta_a_scan = dominant_delta_a(curve.times, curve.p_s);

  const auto residuals = [&](const std::vector<double>& th, std::vector<double>& r) {
    r.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = curve.times[j];
      const double model = 0.5 + 0.5 * std::cos(th[1] * t) * std::exp(-0.5 * th[0] * t);
      r[j] = (model - curve.p_s[j]) / sigma[j];
    }
  };

  // delta_a = 0 is a stationary point of the model (even in delta_a), so a
  // single init can trap the fit; try the scan peak plus a few fallbacks.
  // Among the candidates, identifiable fits (finite parameter covariance)
  // outrank degenerate ones (S driven to the fully-decayed plateau) even
  // when the latter edge them on raw residual.
  const double span = curve.times.back() - curve.times.front();
  double min_dt = span;
  for (std::size_t j = 1; j < n; ++j) min_dt = std::min(min_dt, curve.times[j] - curve.times[j - 1]);
  const double delta_a_cap = 0.8 * kPi / min_dt;     // stay below the grid Nyquist
  const double s_cap = 24.0 / curve.times.front();   // e^-12 at the first point

  const std::vector<double> delta_candidates = {delta_a_scan, 0.0, kPi / span, kTwoPi / span};
  LmResult res;
  bool have = false, have_identifiable = false;
  for (double da0 : delta_candidates) {
    const double s0 = envelope_decay_init(curve.times, curve.p_s, da0);
    LmOptions lm_opts;
    lm_opts.max_iter = 500;
    lm_opts.ftol = 1e-15;
    lm_opts.xtol = 1e-12;
    lm_opts.scales = {std::max(s0, 1e-2), std::max(da0, kTwoPi / (4.0 * curve.times.back()))};
    const LmResult trial = levmar_fit(residuals, {std::min(s0, s_cap), std::min(da0, delta_a_cap)},
                                      {0.0, 0.0}, {s_cap, delta_a_cap}, lm_opts);
    const bool identifiable =
        trial.cov.size() == 4 && trial.cov[0] > 0.0 && std::isfinite(trial.cov[0]);
    const bool better = !have || (identifiable && !have_identifiable) ||
                        (identifiable == have_identifiable && trial.chi2 < res.chi2);
    if (better) {
      res = trial;
      have = true;
      have_identifiable = identifiable;
    }
  }

  fit.s = res.params[0];
  fit.delta_a = res.params[1];
  if (res.cov.size() == 4) {
    fit.s_sigma = std::sqrt(std::max(res.cov[0], 0.0));
    fit.delta_a_sigma = std::sqrt(std::max(res.cov[3], 0.0));
  }
  fit.chi2_red = n > 2 ? res.chi2 / static_cast<double>(n - 2) : res.chi2;
  fit.message = res.message;

  // Tone screen: Eq.-7-shaped data never sits systematically below the fitted
  // lower envelope 1/2 - 1/2 e^(-S t/2); strong-tone Rabi flopping does.
  std::size_t below_envelope = 0, below_045 = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double lower_env = 0.5 - 0.5 * std::exp(-0.5 * fit.s * curve.times[j]);
    if (curve.p_s[j] < lower_env - 3.0 * sigma[j]) ++below_envelope;
    if (curve.p_s[j] < 0.45 - 3.0 * sigma[j]) ++below_045;
  }
  const bool delta_a_negligible = fit.delta_a * curve.times.back() < kPi;
  if (below_envelope >= (n + 4) / 5 ||
      (delta_a_negligible && below_045 >= (n + 3) / 4)) {
    fit.status = RectStatus::kToneContamination;
    fit.message = "survival consistently below the Eq.-2 floor; route to the LLN fitter";
    return fit;
  }
  if (!res.converged || fit.s_sigma <= 0.0 || !std::isfinite(fit.s_sigma)) {
    // An unbounded S direction (fully decayed model) leaves sigma singular.
    fit.status = RectStatus::kNonconvergence;
    return fit;
  }
  fit.status = RectStatus::kOk;
  return fit;
}

ReconstructionProblem ReconstructionProblem::build(std::vector<DecayCurve> curves,
                                                   std::vector<double> delta_a,
                                                   std::vector<double> grid, PsdModel init,
                                                   RefineHyper hyper, std::vector<LlnTone> tones,
                                                   const QuadOptions& quad) {
  if (curves.empty()) throw std::invalid_argument("ReconstructionProblem: no curves");
  if (curves.size() != delta_a.size()) {
    throw std::invalid_argument("ReconstructionProblem: delta_a size mismatch");
  }
  if (grid.size() < 2) throw std::invalid_argument("ReconstructionProblem: grid too small");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) {
      throw std::invalid_argument("ReconstructionProblem: grid must be strictly ascending");
    }
  }
  init.validate();
  if (init.grid != grid) {
    // Resample the init onto the target grid.
    PsdModel resampled;
    resampled.grid = grid;
    resampled.values.reserve(grid.size());
    for (double w : grid) resampled.values.push_back(init.evaluate(w));
    init = std::move(resampled);
  }

  double t_max = 0.0, omega_lo = 1e300, omega_hi = 0.0;
  for (const auto& c : curves) {
    c.validate();
    t_max = std::max(t_max, c.times.back());
    omega_lo = std::min(omega_lo, c.omega);
    omega_hi = std::max(omega_hi, c.omega);
  }
  const double margin = kPi / t_max;
  if (grid.front() > omega_lo - margin + 1e-9 || grid.back() < omega_hi + margin - 1e-9) {
    throw std::invalid_argument(
        "ReconstructionProblem: grid must cover [min Omega - pi/t_max, max Omega + pi/t_max]");
  }

  ReconstructionProblem problem;
  problem.curves = std::move(curves);
  problem.delta_a = std::move(delta_a);
  problem.grid = std::move(grid);
  problem.init = std::move(init);
  problem.hyper = hyper;
  problem.fixed_tones = std::move(tones);

  problem.weights.resize(problem.curves.size());
  problem.chi0.resize(problem.curves.size());
  for (std::size_t c = 0; c < problem.curves.size(); ++c) {
    const auto& curve = problem.curves[c];
    problem.weights[c].resize(curve.times.size());
    problem.chi0[c].assign(curve.times.size(), 0.0);
    for (std::size_t j = 0; j < curve.times.size(); ++j) {
      problem.weights[c][j] = filter_weights(problem.grid, curve.omega, curve.times[j], quad);
      for (const auto& tone : problem.fixed_tones) {
        problem.chi0[c][j] += tone_delta_weight(tone) *
                              filter_function(tone.omega0, FilterSpec{curve.omega, curve.times[j]});
      }
    }
  }
  return problem;
}

ObjectiveEval objective(const ReconstructionProblem& problem, const std::vector<double>& s) {
  if (s.size() != problem.grid.size()) throw std::invalid_argument("objective: S size mismatch");

  const std::size_t nc = problem.curves.size();
  ObjectiveEval eval;
  eval.residuals.resize(nc);

  std::vector<double> partial(nc, 0.0);
  const auto run_curve = [&](std::size_t c) {
    const auto& curve = problem.curves[c];
    auto& res = eval.residuals[c];
    res.resize(curve.times.size());
    double jc = 0.0;
    for (std::size_t j = 0; j < curve.times.size(); ++j) {
      const auto& w = problem.weights[c][j];
      double chi = problem.chi0[c][j];
      for (std::size_t i = 0; i < w.size(); ++i) chi += w[i] * s[i];
      const double model =
          0.5 + 0.5 * std::cos(problem.delta_a[c] * curve.times[j]) * std::exp(-chi);
      res[j] = model - curve.p_s[j];
      jc += res[j] * res[j];
    }
    partial[c] = jc;
  };

  if (problem.exec == Exec::kParallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long c = 0; c < static_cast<long long>(nc); ++c) run_curve(static_cast<std::size_t>(c));
  } else {
    for (std::size_t c = 0; c < nc; ++c) run_curve(c);
  }

  for (std::size_t c = 0; c < nc; ++c) eval.j += partial[c];  // ordered fold
  return eval;
}

namespace {

// Gradient and, optionally, the Gauss-Newton diagonal sum 2 (dP'/dS_i)^2
// used as a Jacobi preconditioner by gradient_refine.
std::vector<double> gradient_impl(const ReconstructionProblem& problem,
                                  const std::vector<double>& s, std::vector<double>* gn_diag) {
  if (s.size() != problem.grid.size()) throw std::invalid_argument("gradient: S size mismatch");

  const std::size_t nc = problem.curves.size();
  const std::size_t ng = problem.grid.size();
  std::vector<std::vector<double>> partial(nc, std::vector<double>(ng, 0.0));
  std::vector<std::vector<double>> partial_diag;
  if (gn_diag) partial_diag.assign(nc, std::vector<double>(ng, 0.0));

  const auto run_curve = [&](std::size_t c) {
    const auto& curve = problem.curves[c];
    auto& g = partial[c];
    for (std::size_t j = 0; j < curve.times.size(); ++j) {
      const auto& w = problem.weights[c][j];
      double chi = problem.chi0[c][j];
      for (std::size_t i = 0; i < ng; ++i) chi += w[i] * s[i];
      const double cosd = std::cos(problem.delta_a[c] * curve.times[j]);
      const double model = 0.5 + 0.5 * cosd * std::exp(-chi);
      const double deriv = -0.5 * cosd * std::exp(-chi);  // dP'/dchi
      const double coeff = 2.0 * (model - curve.p_s[j]) * deriv;
      for (std::size_t i = 0; i < ng; ++i) g[i] += coeff * w[i];
      if (gn_diag) {
        auto& h = partial_diag[c];
        const double d2 = 2.0 * deriv * deriv;
        for (std::size_t i = 0; i < ng; ++i) h[i] += d2 * w[i] * w[i];
      }
    }
  };

  if (problem.exec == Exec::kParallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long c = 0; c < static_cast<long long>(nc); ++c) run_curve(static_cast<std::size_t>(c));
  } else {
    for (std::size_t c = 0; c < nc; ++c) run_curve(c);
  }

  std::vector<double> grad(ng, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < ng; ++i) grad[i] += partial[c][i];
  }
  if (gn_diag) {
    gn_diag->assign(ng, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t i = 0; i < ng; ++i) (*gn_diag)[i] += partial_diag[c][i];
    }
  }
  return grad;
}

}  // namespace

std::vector<double> gradient_of_objective(const ReconstructionProblem& problem,
                                          const std::vector<double>& s) {
  return gradient_impl(problem, s, nullptr);
}

RefineResult gradient_refine(const ReconstructionProblem& problem) {
  const std::size_t ng = problem.grid.size();
  std::vector<double> s = problem.init.values;

  double noise_floor = 0.0;
  if (problem.hyper.noise_floor_scale >= 0.0) {
    for (const auto& curve : problem.curves) {
      for (double sig : curve.stderr_) noise_floor += sig * sig;
    }
    noise_floor *= problem.hyper.noise_floor_scale;
  }

  RefineResult out;
  double j_cur = objective(problem, s).j;
  out.log.push_back({0, j_cur, 0.0});
  if (j_cur <= noise_floor) {
    out.status = RefineStatus::kConverged;
    out.message = "initial J already at the statistical noise floor";
    out.s.grid = problem.grid;
    out.s.values = std::move(s);
    out.s.tones = problem.fixed_tones;
    out.s.validate();
    return out;
  }

  double s_scale = 1.0;
  for (double v : s) s_scale = std::max(s_scale, v);

  double alpha = 1.0;
  std::vector<double> gn_diag;

  for (int iter = 1; iter <= problem.hyper.max_iter; ++iter) {
    const auto grad = gradient_impl(problem, s, &gn_diag);

    // Jacobi-preconditioned direction: node sensitivities differ by orders
    // of magnitude (wide log-spaced hats vs narrow linear ones), and raw
    // steepest descent zigzags along the badly scaled coordinates.
    double h_max = 0.0;
    for (double h : gn_diag) h_max = std::max(h_max, h);
    if (h_max <= 0.0) h_max = 1.0;
    std::vector<double> dir(ng);
    for (std::size_t i = 0; i < ng; ++i) dir[i] = grad[i] / (gn_diag[i] + 1e-9 * h_max);

    bool accepted = false;
    std::vector<double> trial(ng);
    double j_trial = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      double directional = 0.0;
      for (std::size_t i = 0; i < ng; ++i) {
        double v = s[i] - alpha * dir[i];
        if (problem.hyper.project_nonneg && v < 0.0) v = 0.0;
        trial[i] = v;
        directional += grad[i] * (s[i] - v);
      }
      j_trial = objective(problem, trial).j;
      if (j_trial <= j_cur - problem.hyper.armijo_c * directional && j_trial < j_cur) {
        accepted = true;
        break;
      }
      alpha *= problem.hyper.shrink;
      if (alpha < 1e-30) break;
    }

    if (!accepted) {
      // Flat to roundoff in every direction the projection allows.
      double gnorm = 0.0;
      for (std::size_t i = 0; i < ng; ++i) {
        if (s[i] > 0.0 || grad[i] < 0.0) gnorm = std::max(gnorm, std::abs(grad[i]));
      }
      out.status = gnorm * s_scale < 1e-8 * std::max(j_cur, 1e-30) || j_cur == 0.0
                       ? RefineStatus::kConverged
                       : RefineStatus::kLineSearchFailed;
      out.message = out.status == RefineStatus::kLineSearchFailed
                        ? "line search could not decrease J; projected gradient norm " +
                              std::to_string(gnorm)
                        : "stationary point reached";
      break;
    }

    const double rel_impr = (j_cur - j_trial) / std::max(j_cur, 1e-300);
    s = trial;
    j_cur = j_trial;
    out.log.push_back({iter, j_cur, alpha});
    alpha = std::min(alpha * 1.5, 4.0);

    if (j_cur <= noise_floor) {
      out.status = RefineStatus::kConverged;
      out.message = "reached the statistical noise floor";
      break;
    }
    if (rel_impr < problem.hyper.tol) {
      out.status = RefineStatus::kConverged;
      out.message = "relative improvement below tolerance";
      break;
    }
    if (iter == problem.hyper.max_iter) {
      out.status = RefineStatus::kMaxIterations;
      out.message = "iteration cap reached";
    }
  }

  out.s.grid = problem.grid;
  out.s.values = std::move(s);
  out.s.tones = problem.fixed_tones;
  out.s.validate();
  return out;
}

std::vector<double> make_reconstruction_grid(double omega_lo, double omega_hi, double t_max,
                                             double log_knee, std::size_t log_points_per_decade) {
  if (!(omega_lo > 0.0) || omega_hi <= omega_lo || !(t_max > 0.0)) {
    throw std::invalid_argument("make_reconstruction_grid: bad range");
  }
  std::vector<double> grid;
  const double lin_step = kPi / t_max;

  if (omega_lo < log_knee) {
    const double hi = std::min(log_knee, omega_hi);
    const double decades = std::log10(hi / omega_lo);
    const std::size_t n_log =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(decades * static_cast<double>(log_points_per_decade))) + 1);
    for (std::size_t i = 0; i < n_log; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(n_log - 1);
      grid.push_back(omega_lo * std::pow(hi / omega_lo, frac));
    }
  }
  double start = grid.empty() ? omega_lo : grid.back() + lin_step;
  for (double w = start; w < omega_hi; w += lin_step) grid.push_back(w);
  if (grid.empty() || omega_hi - grid.back() > 1e-9 * omega_hi) grid.push_back(omega_hi);

  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return b - a < 1e-12 * b; }),
             grid.end());
  return grid;
}

std::vector<double> mask_tones(const std::vector<double>& grid, const std::vector<LlnTone>& tones,
                               double t_ref) {
  if (!(t_ref > 0.0)) throw std::invalid_argument("mask_tones: t_ref must be positive");
  const double half_width = 3.0 * kTwoPi / t_ref;
  std::vector<double> out;
  out.reserve(grid.size());
  for (double w : grid) {
    bool masked = false;
    for (const auto& tone : tones) {
      if (std::abs(w - tone.omega0) <= half_width) {
        masked = true;
        break;
      }
    }
    if (!masked) out.push_back(w);
  }
  return out;
}

}  // namespace cddspec
