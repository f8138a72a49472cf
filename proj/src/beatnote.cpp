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

#include "cddspec/beatnote.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cddspec/filter_analytics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cddspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// integral_0^inf S(omega) sinc^2(omega tau / 2) domega for the smooth part.
// Fine trapezoid over the first lobes (period 2pi/tau in omega); past that
// sin^2 is replaced by its mean 1/2 and the piecewise-linear S integrates
// against 2/(tau^2 omega^2) analytically, so the cost stays bounded for any
// tau. Flat extrapolation past the grid gets the exact sinc^2 tail.
double sinc2_psd_integral(const PsdModel& psd, double tau) {
  if (psd.grid.empty()) return 0.0;
  const double lobe = kTwoPi / tau;
  const double support_end = psd.grid.back() + 8.0 * lobe;
  const double fine_end = std::min(240.0 * lobe, support_end);
  const double spacing = lobe / 24.0;

  const std::size_t n_uniform = static_cast<std::size_t>(std::ceil(fine_end / spacing)) + 1;
  std::vector<double> nodes;
  nodes.reserve(n_uniform + psd.grid.size());
  for (std::size_t i = 0; i < n_uniform; ++i) {
    nodes.push_back(std::min(static_cast<double>(i) * spacing, fine_end));
  }
  for (double w : psd.grid) {
    if (w > 0.0 && w < fine_end) nodes.push_back(w);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12 * (1.0 + b); }),
              nodes.end());

  double acc = 0.0;
  double prev = psd.evaluate(nodes[0]);  // sinc(0) = 1
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double sc = sinc(nodes[i] * tau / 2.0);
    const double f = psd.evaluate(nodes[i]) * sc * sc;
    acc += 0.5 * (prev + f) * (nodes[i] - nodes[i - 1]);
    prev = f;
  }

  if (fine_end >= support_end) {
    acc += psd.values.back() * (2.0 / tau) * cddspec::sinc_sq_integral_tail(fine_end * tau / 2.0);
    return acc;
  }

  // Averaged remainder over [fine_end, grid_end]: integral of S(omega) *
  // 2/(tau omega)^2 with S linear per segment, S = a + b omega:
  // integral (a + b w)/w^2 dw = a (1/w1 - 1/w2) + b ln(w2/w1).
  const double k = 2.0 / (tau * tau);
  double w_lo = fine_end;
  double s_lo = psd.evaluate(w_lo);
  for (std::size_t i = 0; i < psd.grid.size(); ++i) {
    const double w_hi = psd.grid[i];
    if (w_hi <= w_lo) continue;
    const double s_hi = psd.values[i];
    const double b = (s_hi - s_lo) / (w_hi - w_lo);
    const double a = s_lo - b * w_lo;
    acc += k * (a * (1.0 / w_lo - 1.0 / w_hi) + b * std::log(w_hi / w_lo));
    w_lo = w_hi;
    s_lo = s_hi;
  }
  acc += k * psd.values.back() / w_lo;  // flat tail past the grid
  return acc;
}

double envelope_exponent(const BeatnoteConfig& cfg, double tau) {
  if (tau == 0.0) return 0.0;
  double inner = 2.0 * (sinc2_psd_integral(cfg.s1, tau) + sinc2_psd_integral(cfg.s2, tau));
  for (const auto* psd : {&cfg.s1, &cfg.s2}) {
    for (const auto& tone : psd->tones) {
      const double sc = sinc(tone.omega0 * tau / 2.0);
      inner += 2.0 * tone_delta_weight(tone) * sc * sc;
    }
  }
  return tau * tau / (4.0 * kPi) * inner;
}

}  // namespace

void BeatnoteConfig::validate() const {
  s1.validate();
  s2.validate();
  if (!(tau_max > 0.0)) throw std::invalid_argument("BeatnoteConfig: tau_max must be positive");
  if (!(amp_product > 0.0)) {
    throw std::invalid_argument("BeatnoteConfig: amp_product must be positive");
  }
  if (tau_count < 16) throw std::invalid_argument("BeatnoteConfig: tau_count too small");
  if (omegas.empty()) throw std::invalid_argument("BeatnoteConfig: empty output grid");
}

double coherence_envelope(const BeatnoteConfig& cfg, double tau) {
  if (tau < 0.0) throw std::invalid_argument("coherence_envelope: tau must be >= 0");
  return std::exp(-envelope_exponent(cfg, tau));
}

double suggest_tau_max(const BeatnoteConfig& cfg, double target) {
  double hi = 1e-6;
  for (int i = 0; i < 60 && coherence_envelope(cfg, hi) > target; ++i) hi *= 2.0;
  double lo = hi / 2.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (coherence_envelope(cfg, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

BeatnoteSpectrum simulate_beatnote(const BeatnoteConfig& cfg, Exec exec) {
  cfg.validate();
  const double env_at_cut = coherence_envelope(cfg, cfg.tau_max);
  if (env_at_cut >= 1e-6) {
    throw std::invalid_argument("simulate_beatnote: envelope(tau_max) = " +
                                std::to_string(env_at_cut) + " >= 1e-6; use tau_max >= " +
                                std::to_string(suggest_tau_max(cfg)));
  }

  const std::size_t nt = cfg.tau_count;
  const double dtau = cfg.tau_max / static_cast<double>(nt - 1);
  std::vector<double> env(nt);

  const auto fill_env = [&](std::size_t i) {
    env[i] = std::exp(-envelope_exponent(cfg, static_cast<double>(i) * dtau));
  };
  if (exec == Exec::kParallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
    for (long long i = 0; i < static_cast<long long>(nt); ++i) fill_env(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < nt; ++i) fill_env(i);
  }

  BeatnoteSpectrum spec;
  spec.omegas = cfg.omegas;
  spec.values.assign(cfg.omegas.size(), 0.0);

  const auto eval_omega = [&](std::size_t m) {
    const double dw = cfg.omegas[m] - cfg.omega0;
    double acc = 0.5 * env[0];  // cos(0) = 1, trapezoid end weight
    for (std::size_t i = 1; i + 1 < nt; ++i) {
      acc += std::cos(dw * static_cast<double>(i) * dtau) * env[i];
    }
    acc += 0.5 * std::cos(dw * cfg.tau_max) * env[nt - 1];
    spec.values[m] = cfg.amp_product * 2.0 * acc * dtau;
  };
  if (exec == Exec::kParallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long m = 0; m < static_cast<long long>(cfg.omegas.size()); ++m) {
      eval_omega(static_cast<std::size_t>(m));
    }
  } else {
    for (std::size_t m = 0; m < cfg.omegas.size(); ++m) eval_omega(m);
  }
  return spec;
}

}  // namespace cddspec
