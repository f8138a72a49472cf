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

#include "cddspec/lln_model.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <complex>
#include <stdexcept>

#include "cddspec/levmar.hpp"

namespace cddspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double model_point(double t, double eta, double omega_r, double g1t, double g2t) {
  const double c = std::cos(eta), s = std::sin(eta);
  return 0.5 + 0.5 * (c * c * std::exp(-g1t * t) +
                      s * s * std::exp(-g2t * t) * std::cos(omega_r * t));
}

/// Dominant oscillation frequency of (p - mean) by a discrete spectrum scan;
/// robust to non-uniform time grids.
double dominant_frequency(const std::vector<double>& times, const std::vector<double>& p) {
  const std::size_t n = times.size();
  const double span = times.back() - times.front();
  double min_dt = span;
  for (std::size_t j = 1; j < n; ++j) min_dt = std::min(min_dt, times[j] - times[j - 1]);

  double mean = 0.0;
  for (double v : p) mean += v;
  mean /= static_cast<double>(n);

  const double w_lo = kTwoPi / (2.0 * span);
  const double w_hi = 0.9 * kPi / min_dt;
  const std::size_t n_scan = 800;
  double best_w = w_lo, best_a = -1.0;
  for (std::size_t i = 0; i < n_scan; ++i) {
    const double w = w_lo + (w_hi - w_lo) * static_cast<double>(i) / static_cast<double>(n_scan - 1);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      acc += (p[j] - mean) * std::exp(std::complex<double>(0.0, -w * times[j]));
    }
    const double a = std::norm(acc);
    if (a > best_a) {
      best_a = a;
      best_w = w;
    }
  }
  return best_w;
}

/// Decay-rate initial guess from log-envelope regression over windows of one
/// oscillation period.
double envelope_rate(const std::vector<double>& times, const std::vector<double>& p,
                     double omega_r) {
  const double period = kTwoPi / omega_r;
  std::vector<double> tw, lm;
  double w_start = times.front();
  double peak = 0.0;
  bool any = false;
  for (std::size_t j = 0; j <= times.size(); ++j) {
    const bool flush = (j == times.size()) || (times[j] >= w_start + period);
    if (flush && any && peak > 1e-6) {
      tw.push_back(w_start + 0.5 * period);
      lm.push_back(std::log(peak));
      peak = 0.0;
      any = false;
      if (j < times.size()) w_start = times[j];
    }
    if (j < times.size()) {
      peak = std::max(peak, std::abs(p[j] - 0.5));
      any = true;
    }
  }
  if (tw.size() < 2) return 0.1 / (times.back() - times.front());
  // least-squares slope of lm vs tw
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  const double nn = static_cast<double>(tw.size());
  for (std::size_t j = 0; j < tw.size(); ++j) {
    st += tw[j];
    sl += lm[j];
    stt += tw[j] * tw[j];
    stl += tw[j] * lm[j];
  }
  const double denom = nn * stt - st * st;
  if (std::abs(denom) < 1e-30) return 0.1 / (times.back() - times.front());
  const double slope = (nn * stl - st * sl) / denom;
  return std::max(-slope, 0.0);
}

// The model is even in the detuning, so a lone curve cannot tell omega0 =
// Omega + |Delta| from its mirror Omega - |Delta|; both candidates are kept
// and the cross-curve pooling picks the consistent branch.
std::array<LlnCurveFit, 2> fit_one_curve(const DecayCurve& curve, const LlnFitOptions& opts) {
  std::array<LlnCurveFit, 2> candidates;
  candidates[0].drive_omega = curve.omega;
  candidates[1].drive_omega = curve.omega;

  const std::size_t n = curve.times.size();
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = curve.stderr_[j] > 0.0 ? curve.stderr_[j] : 1.0;

  const double omega_r0 = dominant_frequency(curve.times, curve.p_s);
  const double span = curve.times.back() - curve.times.front();
  if (omega_r0 * span < 2.0 * kTwoPi) {
    candidates[0].message = candidates[1].message = "fewer than two oscillation periods resolved";
    return candidates;
  }
  const double rate0 = envelope_rate(curve.times, curve.p_s, omega_r0);

  // Oscillation amplitude -> tilt angle -> omega_lln split of omega_r.
  double amp = 0.0;
  for (std::size_t j = 0; j < n && curve.times[j] < curve.times.front() + 2.0 * kTwoPi / omega_r0;
       ++j) {
    amp = std::max(amp, 2.0 * std::abs(curve.p_s[j] - 0.5));
  }
  const double sin_eta = std::sqrt(std::min(std::max(amp, 0.05), 1.0));
  const double omega_lln0 = omega_r0 * sin_eta;
  const double delta0 = omega_r0 * std::sqrt(std::max(1.0 - sin_eta * sin_eta, 0.0));

  const auto residuals = [&](const std::vector<double>& th, std::vector<double>& r) {
    const double eta = std::atan2(th[1], th[0]);
    const double omega_r = std::hypot(th[0], th[1]);
    r.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      r[j] = (model_point(curve.times[j], eta, omega_r, th[2], th[3]) - curve.p_s[j]) / sigma[j];
    }
  };

  LmOptions lm_opts;
  lm_opts.max_iter = 600;
  lm_opts.ftol = 1e-15;
  lm_opts.xtol = 1e-11;
  lm_opts.scales = {std::max(omega_r0, 1e2), std::max(omega_r0, 1e2), std::max(rate0, 1e1),
                    std::max(rate0, 1e1)};

  for (int s = 0; s < 2; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    // Each branch is confined to its detuning sign so the two candidates
    // stay distinct; the resonant case Delta ~ 0 is reachable from both.
    const std::vector<double> lower = {s == 0 ? 0.0 : -1e8, 0.0, 0.0, 0.0};
    const std::vector<double> upper = {s == 0 ? 1e8 : 0.0, 1e8, 1e7, 1e7};
    std::vector<double> x0 = {sign * delta0, omega_lln0, rate0, rate0};
    const LmResult res = levmar_fit(residuals, x0, lower, upper, lm_opts);

    LlnCurveFit& fit = candidates[s];
    const double delta = res.params[0];
    fit.omega0 = curve.omega + delta;
    fit.omega_lln = res.params[1];
    fit.gamma1_tilde = res.params[2];
    fit.gamma2_tilde = res.params[3];
    fit.converged = res.converged;
    fit.message = res.message;
    if (res.cov.size() == 16) {
      fit.omega0_sigma = std::sqrt(std::max(res.cov[0], 0.0));
      fit.omega_lln_sigma = std::sqrt(std::max(res.cov[5], 0.0));
      fit.gamma1_tilde_sigma = std::sqrt(std::max(res.cov[10], 0.0));
      fit.gamma2_tilde_sigma = std::sqrt(std::max(res.cov[15], 0.0));
    }
    fit.chi2_red = n > 4 ? res.chi2 / static_cast<double>(n - 4) : res.chi2;

    // Invert gamma1_tilde -> gamma1 -> S(Omega), assuming gamma_v = 0.
    const double eta = std::atan2(fit.omega_lln, delta);
    const double cos2 = std::cos(eta) * std::cos(eta);
    fit.s_omega = 4.0 * fit.gamma1_tilde / (1.0 + cos2);
    fit.s_is_upper_bound = !opts.gamma_v_zero;
  }
  return candidates;
}

}  // namespace

DressedRates dressed_rates(double gamma1, double gamma_phi, double gamma_v, double omega_lln,
                           double delta) {
  if (gamma1 < 0.0 || gamma_phi < 0.0 || gamma_v < 0.0) {
    throw std::invalid_argument("dressed_rates: rates must be >= 0");
  }
  if (omega_lln < 0.0) throw std::invalid_argument("dressed_rates: omega_lln must be >= 0");

  DressedRates rates;
  rates.gamma1 = gamma1;
  rates.gamma_phi = gamma_phi;
  rates.gamma_v = gamma_v;
  rates.eta = std::atan2(omega_lln, delta);
  rates.omega_r = std::hypot(omega_lln, delta);
  const double c2 = std::cos(rates.eta) * std::cos(rates.eta);
  const double s2 = std::sin(rates.eta) * std::sin(rates.eta);
  rates.gamma1_tilde = 0.5 * (1.0 + c2) * gamma1 + gamma_v * s2;
  const double gamma_phi_tilde = 0.5 * gamma1 * s2 + gamma_phi * c2;
  rates.gamma2_tilde = 0.5 * rates.gamma1_tilde + gamma_phi_tilde;
  return rates;
}

std::vector<double> lln_decay_model(const LlnTone& tone, double drive_omega,
                                    const DressedRates& rates, const std::vector<double>& times) {
  const double delta = tone.omega0 - drive_omega;
  const double eta = std::atan2(tone.omega_lln, delta);
  const double omega_r = std::hypot(tone.omega_lln, delta);
  std::vector<double> p;
  p.reserve(times.size());
  for (double t : times) {
    p.push_back(model_point(t, eta, omega_r, rates.gamma1_tilde, rates.gamma2_tilde));
  }
  return p;
}

namespace {

bool candidate_usable(const LlnCurveFit& fit, const LlnFitOptions& opts) {
  return fit.converged && fit.chi2_red < opts.chi2_red_gate && fit.omega0_sigma > 0.0 &&
         fit.omega_lln_sigma > 0.0 && std::isfinite(fit.omega0_sigma) &&
         std::isfinite(fit.omega_lln_sigma);
}

}  // namespace

LlnFitReport fit_lln(const std::vector<DecayCurve>& curves, const LlnFitOptions& opts) {
  if (curves.size() < 3) throw std::invalid_argument("fit_lln: need at least 3 curves");
  for (const auto& c : curves) {
    c.validate();
    if (c.times.size() < 6) throw std::invalid_argument("fit_lln: curves need >= 6 points");
  }

  std::vector<std::array<LlnCurveFit, 2>> all;
  all.reserve(curves.size());
  for (const auto& c : curves) all.push_back(fit_one_curve(c, opts));

  // The per-curve detuning-sign ambiguity leaves two omega0 candidates per
  // curve; the true branch is the one shared across drive frequencies
  // (mirrors scatter as 2 Omega_c - omega0). Pick the pivot with the highest
  // kernel-weighted support, then keep each curve's closer candidate.
  double best_pivot = 0.0, best_score = -1.0;
  for (const auto& pair : all) {
    for (const auto& cand : pair) {
      if (!candidate_usable(cand, opts)) continue;
      double score = 0.0;
      for (const auto& other : all) {
        double best_k = 0.0;
        for (const auto& oc : other) {
          if (!candidate_usable(oc, opts)) continue;
          const double h = std::max(3.0 * oc.omega0_sigma, kTwoPi * 20.0);
          const double d = (oc.omega0 - cand.omega0) / h;
          best_k = std::max(best_k, 1.0 / (1.0 + d * d));
        }
        score += best_k;
      }
      if (score > best_score) {
        best_score = score;
        best_pivot = cand.omega0;
      }
    }
  }

  LlnFitReport report;
  report.curves.reserve(curves.size());
  double w0_num = 0.0, w0_den = 0.0, wl_num = 0.0, wl_den = 0.0;
  for (const auto& pair : all) {
    const bool u0 = candidate_usable(pair[0], opts);
    const bool u1 = candidate_usable(pair[1], opts);
    std::size_t pick = 0;
    if (u0 && u1) {
      pick = std::abs(pair[0].omega0 - best_pivot) <= std::abs(pair[1].omega0 - best_pivot) ? 0 : 1;
    } else if (u1) {
      pick = 1;
    }
    LlnCurveFit fit = pair[pick];
    fit.excluded = !(u0 || u1);
    report.curves.push_back(fit);
    if (fit.excluded) continue;
    const double w0w = 1.0 / (fit.omega0_sigma * fit.omega0_sigma);
    const double wlw = 1.0 / (fit.omega_lln_sigma * fit.omega_lln_sigma);
    w0_num += w0w * fit.omega0;
    w0_den += w0w;
    wl_num += wlw * fit.omega_lln;
    wl_den += wlw;
    ++report.n_used;
  }
  if (report.n_used == 0) return report;

  report.omega0 = w0_num / w0_den;
  report.omega0_sigma = std::sqrt(1.0 / w0_den);
  report.omega_lln = wl_num / wl_den;
  report.omega_lln_sigma = std::sqrt(1.0 / wl_den);

  const double e0 = 2.0 * report.omega_lln;
  report.s_pi_e0_sq = kPi * e0 * e0;
  report.s_pi_omega_lln_sq = kPi * report.omega_lln * report.omega_lln;
  return report;
}

}  // namespace cddspec
