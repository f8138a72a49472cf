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

#include "cddspec/filter_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cddspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Fine trapezoid grid over [0, omega_end]: uniform spacing resolving the
// sinc^2 oscillation (period 2pi/t in omega), merged with the PSD grid so
// interpolation kinks land on nodes.
std::vector<double> build_fine_grid(const std::vector<double>& psd_grid, double omega_drive,
                                    double t, double omega_end, const QuadOptions& opts) {
  const double spacing = kTwoPi / (t * opts.points_per_lobe);
  const std::size_t n_uniform = static_cast<std::size_t>(std::ceil(omega_end / spacing)) + 1;

  std::vector<double> nodes;
  nodes.reserve(n_uniform + psd_grid.size() + 2);
  for (std::size_t i = 0; i < n_uniform; ++i) {
    nodes.push_back(std::min(static_cast<double>(i) * spacing, omega_end));
  }
  for (double w : psd_grid) {
    if (w > 0.0 && w < omega_end) nodes.push_back(w);
  }
  if (omega_drive > 0.0 && omega_drive < omega_end) nodes.push_back(omega_drive);

  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12 * (1.0 + b); }),
              nodes.end());
  return nodes;
}

double tail_end(double omega_drive, double t, const QuadOptions& opts, double grid_back) {
  const double lobe = kTwoPi / t;
  return std::max(omega_drive + opts.lobes_past_peak * lobe, grid_back + 8.0 * lobe);
}

// Exact tail of the two sinc^2 terms past omega_end for a flat PSD level:
// integral_omega_end^inf F domega = (t/2pi) [T(u-) + T(u+)] with
// T(a) = integral_a^inf sinc^2.
double analytic_tail(double s_end, double omega_drive, double t, double omega_end) {
  const double u_minus = (omega_end - omega_drive) * t / 2.0;
  const double u_plus = (omega_end + omega_drive) * t / 2.0;
  return s_end * (t / kTwoPi) *
         (sinc_sq_integral_tail(u_minus) + sinc_sq_integral_tail(u_plus));
}

}  // namespace

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double sinc_sq_integral_tail(double a) {
  if (!(a > 0.0)) return kPi / 2.0;
  // integral_a^inf sin^2(u)/u^2 du = pi/2 - Si(2a) + sin^2(a)/a, with Si by
  // its large-argument asymptotic series: Si(x) = pi/2 - f cos x - g sin x.
  const double x = 2.0 * a;
  if (x < 20.0) {
    // Fall back to fine trapezoid on [a, 200] plus the asymptotic remainder.
    const int n = 4000;
    const double hi = 200.0;
    const double h = (hi - a) / n;
    double acc = 0.5 * (sinc(a) * sinc(a) + sinc(hi) * sinc(hi));
    for (int i = 1; i < n; ++i) {
      const double u = a + h * i;
      acc += sinc(u) * sinc(u);
    }
    return acc * h + sinc_sq_integral_tail(hi);
  }
  const double ix2 = 1.0 / (x * x);
  const double f = (1.0 - 2.0 * ix2 + 24.0 * ix2 * ix2 - 720.0 * ix2 * ix2 * ix2) / x;
  const double g = (1.0 - 6.0 * ix2 + 120.0 * ix2 * ix2 - 5040.0 * ix2 * ix2 * ix2) * ix2;
  const double si_tail = f * std::cos(x) + g * std::sin(x);  // pi/2 - Si(x)
  const double sa = std::sin(a);
  return si_tail + sa * sa / a;
}

double filter_function(double omega, const FilterSpec& spec) {
  if (!(spec.t > 0.0)) throw std::invalid_argument("filter_function: t must be positive");
  const double sp = sinc((omega + spec.omega_drive) * spec.t / 2.0);
  const double sm = sinc((omega - spec.omega_drive) * spec.t / 2.0);
  return spec.t * spec.t * (sp * sp + sm * sm) / (4.0 * kPi);
}

double chi_integral(const PsdModel& psd, double omega_drive, double t, const QuadOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("chi_integral: t must be positive");
  double chi = 0.0;

  if (!psd.grid.empty()) {
    const double omega_end = tail_end(omega_drive, t, opts, psd.grid.back());
    const auto nodes = build_fine_grid(psd.grid, omega_drive, t, omega_end, opts);
    const FilterSpec spec{omega_drive, t};

    double prev_f = psd.evaluate(nodes[0]) * filter_function(nodes[0], spec);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const double f = psd.evaluate(nodes[i]) * filter_function(nodes[i], spec);
      chi += 0.5 * (prev_f + f) * (nodes[i] - nodes[i - 1]);
      prev_f = f;
    }
    chi += analytic_tail(psd.values.back(), omega_drive, t, omega_end);
  }

  for (const auto& tone : psd.tones) {
    chi += tone_delta_weight(tone) * filter_function(tone.omega0, FilterSpec{omega_drive, t});
  }
  return chi;
}

std::vector<double> filter_weights(const std::vector<double>& grid, double omega_drive, double t,
                                   const QuadOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("filter_weights: t must be positive");
  if (grid.empty()) return {};

  const double omega_end = tail_end(omega_drive, t, opts, grid.back());
  const auto nodes = build_fine_grid(grid, omega_drive, t, omega_end, opts);
  const FilterSpec spec{omega_drive, t};
  const std::size_t n = grid.size();
  std::vector<double> weights(n, 0.0);

  // Trapezoid weight of each fine node, distributed onto the hat functions
  // of the PSD grid (flat extrapolation extends the boundary hats).
  std::size_t seg = 0;  // grid interval index such that grid[seg] <= omega
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double omega = nodes[i];
    double tw = 0.0;
    if (i > 0) tw += 0.5 * (omega - nodes[i - 1]);
    if (i + 1 < nodes.size()) tw += 0.5 * (nodes[i + 1] - omega);
    const double f = tw * filter_function(omega, spec);

    if (omega <= grid.front()) {
      weights[0] += f;
    } else if (omega >= grid.back()) {
      weights[n - 1] += f;
    } else {
      while (seg + 2 < n && grid[seg + 1] <= omega) ++seg;
      const double frac = (omega - grid[seg]) / (grid[seg + 1] - grid[seg]);
      weights[seg] += f * (1.0 - frac);
      weights[seg + 1] += f * frac;
    }
  }

  // The analytic tail sees the boundary value, i.e. the last hat.
  weights[n - 1] += analytic_tail(1.0, omega_drive, t, omega_end);
  return weights;
}

PredictedDecay predict_decay(const PsdModel& psd, double omega_drive,
                             const std::vector<double>& times, double delta_a,
                             const QuadOptions& opts) {
  psd.validate();
  PredictedDecay out;
  out.curve.omega = omega_drive;
  out.curve.times = times;
  out.curve.n_traj = 0;
  out.curve.p_s.reserve(times.size());
  out.curve.stderr_.assign(times.size(), 0.0);
  out.chi.reserve(times.size());
  out.deep_decay.reserve(times.size());

  for (double t : times) {
    const double chi = chi_integral(psd, omega_drive, t, opts);
    out.chi.push_back(chi);
    out.deep_decay.push_back(chi > 5.0 ? 1 : 0);
    out.curve.p_s.push_back(0.5 + 0.5 * std::cos(delta_a * t) * std::exp(-chi));
  }
  out.curve.validate();
  return out;
}

}  // namespace cddspec
