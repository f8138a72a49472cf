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

#include "cddspec/noise_synth.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "cddspec/fft.hpp"

namespace cddspec {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

void NoiseTrajectory::validate() const {
  if (samples.size() < 2) throw std::invalid_argument("NoiseTrajectory: length must be >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("NoiseTrajectory: dt must be positive");
  }
}

NoiseTrajectory synthesize(const PsdModel& psd, double dt, std::size_t n, std::uint64_t seed,
                           const SynthOptions& opts) {
  psd.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("synthesize: dt must be positive");
  if (n < 2) throw std::invalid_argument("synthesize: n must be >= 2");
  if (!is_power_of_two(n)) throw std::invalid_argument("synthesize: n must be a power of two");

  // Generate on a circle of twice the requested length and keep the first
  // half; the discarded half carries the wrap-around correlations.
  const std::size_t big_n = 2 * n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  NoiseTrajectory traj;
  traj.dt = dt;
  traj.seed = seed;
  traj.samples.assign(n, 0.0);

  if (!psd.grid.empty()) {
    const double domega = kTwoPi / (static_cast<double>(big_n) * dt);
    std::vector<std::complex<double>> spec(big_n, {0.0, 0.0});

    // sigma2_m = <|F_m|^2> = N S(omega_m) / dt with S the symmetric spectral
    // density of the convention note in the header. Draw order is part of
    // the determinism contract: m = 0, then (re, im) pairs for
    // m = 1..N/2-1, then m = N/2.
    const auto sigma = [&](std::size_t m) {
      const double s = psd.evaluate(static_cast<double>(m) * domega);
      return std::sqrt(static_cast<double>(big_n) * s / dt);
    };
    spec[0] = std::complex<double>(sigma(0) * gauss(rng), 0.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t m = 1; m < big_n / 2; ++m) {
      const double s = sigma(m) * inv_sqrt2;
      const double re = s * gauss(rng);
      const double im = s * gauss(rng);
      spec[m] = std::complex<double>(re, im);
      spec[big_n - m] = std::complex<double>(re, -im);
    }
    spec[big_n / 2] = std::complex<double>(sigma(big_n / 2) * gauss(rng), 0.0);

    fft(spec, true);
    for (std::size_t k = 0; k < n; ++k) traj.samples[k] = spec[k].real();
  }

  if (!psd.tones.empty()) {
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    for (const auto& tone : psd.tones) {
      const double phi = opts.randomize_tone_phase ? uniform(rng) : tone.phi0;
      const double e0 = 2.0 * tone.omega_lln;
      for (std::size_t k = 0; k < n; ++k) {
        traj.samples[k] += e0 * std::cos(tone.omega0 * static_cast<double>(k) * dt + phi);
      }
    }
  }

  return traj;
}

PsdModel estimate_psd(const NoiseTrajectory& traj, std::size_t segment_len) {
  traj.validate();
  if (segment_len < 4) throw std::invalid_argument("estimate_psd: segment_len must be >= 4");
  if (segment_len > traj.samples.size()) {
    throw std::invalid_argument("estimate_psd: segment_len exceeds trajectory length");
  }

  const std::size_t len = segment_len;
  const std::size_t hop = len / 2;  // 50% overlap
  const std::size_t n_seg = (traj.samples.size() - len) / hop + 1;

  std::vector<double> window(len);
  double wsq = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    window[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(len - 1)));
    wsq += window[k] * window[k];
  }

  const std::size_t n_bins = len / 2 + 1;
  std::vector<double> accum(n_bins, 0.0);
  std::vector<std::complex<double>> seg(len);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const double* x = traj.samples.data() + s * hop;
    for (std::size_t k = 0; k < len; ++k) seg[k] = std::complex<double>(window[k] * x[k], 0.0);
    fft(seg, false);
    for (std::size_t m = 0; m < n_bins; ++m) accum[m] += std::norm(seg[m]);
  }

  // S(omega_m) = dt <|X_m|^2> / sum(w^2): the symmetric density on the
  // non-negative grid, so estimate_psd inverts synthesize and total power is
  // (1/pi) integral_0^Nyquist S domega.
  const double base = traj.dt / (wsq * static_cast<double>(n_seg));
  PsdModel psd;
  psd.grid.resize(n_bins);
  psd.values.resize(n_bins);
  const double domega = kTwoPi / (static_cast<double>(len) * traj.dt);
  for (std::size_t m = 0; m < n_bins; ++m) {
    psd.grid[m] = static_cast<double>(m) * domega;
    psd.values[m] = base * accum[m];
  }
  return psd;
}

std::vector<double> autocorrelation(const NoiseTrajectory& traj, std::size_t max_lag) {
  traj.validate();
  if (max_lag >= traj.samples.size()) {
    throw std::invalid_argument("autocorrelation: max_lag must be < trajectory length");
  }
  const std::size_t n = traj.samples.size();
  std::vector<double> corr(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j + k < n; ++j) sum += traj.samples[j] * traj.samples[j + k];
    corr[k] = sum / static_cast<double>(n);
  }
  return corr;
}

}  // namespace cddspec
