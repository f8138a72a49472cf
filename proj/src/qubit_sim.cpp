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

#include "cddspec/qubit_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "cddspec/fft.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cddspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr std::uint64_t kDriveNoiseSalt = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kShotSalt = 0x5DEECE66DULL;

void rotate(BlochState& r, double bx, double by, double bz, double h) {
  const double bmag = std::sqrt(bx * bx + by * by + bz * bz);
  const double theta = bmag * h;
  if (theta == 0.0) return;
  const double ux = bx / bmag, uy = by / bmag, uz = bz / bmag;
  const double c = std::cos(theta), s = std::sin(theta);
  const double dot = ux * r.x + uy * r.y + uz * r.z;
  const double cx = uy * r.z - uz * r.y;
  const double cy = uz * r.x - ux * r.z;
  const double cz = ux * r.y - uy * r.x;
  const double k = dot * (1.0 - c);
  r = BlochState{r.x * c + cx * s + ux * k, r.y * c + cy * s + uy * k, r.z * c + cz * s + uz * k};
}

double fastest_frequency(const PsdModel& psd, const DriveConfig& drive) {
  double w = drive.omega;
  if (!psd.grid.empty()) w = std::max(w, psd.grid.back());
  for (const auto& tone : psd.tones) w = std::max(w, tone.omega0);
  if (drive.drive_noise && !drive.drive_noise->grid.empty()) {
    w = std::max(w, drive.drive_noise->grid.back());
  }
  return w;
}

}  // namespace

void DriveConfig::validate(bool require_positive_omega) const {
  if (!std::isfinite(omega) || omega < 0.0 || (require_positive_omega && omega == 0.0)) {
    throw std::invalid_argument("DriveConfig: invalid Rabi frequency");
  }
  if (!std::isfinite(stark_shift)) throw std::invalid_argument("DriveConfig: invalid stark_shift");
  if (times.empty()) throw std::invalid_argument("DriveConfig: times must be non-empty");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!std::isfinite(times[j]) || times[j] <= 0.0) {
      throw std::invalid_argument("DriveConfig: times must be positive");
    }
    if (j > 0 && times[j] <= times[j - 1]) {
      throw std::invalid_argument("DriveConfig: times must be strictly ascending");
    }
  }
  if (drive_noise) drive_noise->validate();
}

void DecayCurve::validate() const {
  if (times.size() != p_s.size() || times.size() != stderr_.size()) {
    throw std::invalid_argument("DecayCurve: length mismatch");
  }
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (p_s[j] < -1e-9 || p_s[j] > 1.0 + 1e-9) {
      throw std::invalid_argument("DecayCurve: p_s out of [0, 1]");
    }
    if (stderr_[j] < 0.0) throw std::invalid_argument("DecayCurve: negative stderr");
  }
}

std::vector<BlochState> evolve_one(const NoiseTrajectory& traj, const DriveConfig& drive,
                                   Frame frame, const NoiseTrajectory* drive_noise) {
  traj.validate();
  drive.validate(/*require_positive_omega=*/false);
  const double dt = traj.dt;
  const double t_last = drive.times.back();
  if (t_last > (static_cast<double>(traj.samples.size()) - 1.0) * dt * (1.0 + 1e-12)) {
    throw std::invalid_argument("evolve_one: trajectory shorter than requested times");
  }
  if (drive.omega > 0.0 && dt > kTwoPi / (20.0 * drive.omega) * (1.0 + 1e-9)) {
    throw std::invalid_argument("evolve_one: dt too coarse for the drive period");
  }
  if (drive_noise) {
    drive_noise->validate();
    if (drive_noise->dt != dt || drive_noise->samples.size() < traj.samples.size()) {
      throw std::invalid_argument("evolve_one: drive-noise trajectory grid mismatch");
    }
  }

  std::vector<BlochState> out;
  out.reserve(drive.times.size());
  BlochState r{1.0, 0.0, 0.0};
  std::size_t k = 0;    // current sample interval
  double tau = 0.0;     // offset within the interval, [0, dt)

  for (double target : drive.times) {
    while (true) {
      const double t_now = static_cast<double>(k) * dt + tau;
      if (target <= t_now * (1.0 + 1e-15) + 1e-300) break;
      const double room = dt - tau;
      const double h = std::min(room, target - t_now);
      const double f = traj.samples[k];
      const double d_omega = drive_noise ? drive_noise->samples[k] : 0.0;
      if (frame == Frame::kRotating) {
        const double phase = drive.omega * (t_now + 0.5 * h);
        rotate(r, d_omega, f * std::sin(phase), f * std::cos(phase), h);
      } else {
        rotate(r, drive.omega + d_omega, 0.0, f, h);
      }
      if (h == room) {
        ++k;
        tau = 0.0;
      } else {
        tau += h;
      }
    }
    out.push_back(r);
  }
  return out;
}

DecayCurve monte_carlo_decay(const PsdModel& psd, const DriveConfig& drive, std::size_t n_traj,
                             std::uint64_t seed, const McOptions& opts) {
  psd.validate();
  drive.validate(/*require_positive_omega=*/true);
  if (n_traj < 2) throw std::invalid_argument("monte_carlo_decay: n_traj must be >= 2");
  if (opts.points_per_period < 20.0 && opts.dt_override <= 0.0) {
    throw std::invalid_argument("monte_carlo_decay: points_per_period must be >= 20");
  }

  const double omega_fast = fastest_frequency(psd, drive);
  double dt = opts.dt_override > 0.0 ? opts.dt_override
                                     : kTwoPi / (opts.points_per_period * omega_fast);
  const double t_last = drive.times.back();
  std::size_t n = next_power_of_two(static_cast<std::size_t>(std::ceil(t_last / dt)) + 2);
  if (n > (static_cast<std::size_t>(1) << 24)) {
    throw std::invalid_argument("monte_carlo_decay: sampling grid too large; coarsen times or dt");
  }

  const std::size_t nt = drive.times.size();
  std::vector<double> psurv(n_traj * nt, 0.0);

  const auto run_one = [&](std::size_t idx) {
    const std::uint64_t traj_seed = seed + static_cast<std::uint64_t>(idx);
    const NoiseTrajectory traj = synthesize(psd, dt, n, traj_seed);
    NoiseTrajectory dn;
    const NoiseTrajectory* dn_ptr = nullptr;
    if (drive.drive_noise) {
      dn = synthesize(*drive.drive_noise, dt, n, traj_seed ^ kDriveNoiseSalt);
      dn_ptr = &dn;
    }
    const auto states = evolve_one(traj, drive, opts.frame, dn_ptr);
    for (std::size_t j = 0; j < nt; ++j) {
      const double a = drive.stark_shift * drive.times[j];
      psurv[idx * nt + j] =
          0.5 * (1.0 + states[j].x * std::cos(a) + states[j].y * std::sin(a));
    }
  };

  if (opts.exec == Exec::kParallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long idx = 0; idx < static_cast<long long>(n_traj); ++idx) {
      run_one(static_cast<std::size_t>(idx));
    }
  } else {
    for (std::size_t idx = 0; idx < n_traj; ++idx) run_one(idx);
  }

  // Ordered two-pass reduction keeps the result independent of scheduling.
  DecayCurve curve;
  curve.omega = drive.omega;
  curve.times = drive.times;
  curve.n_traj = n_traj;
  curve.p_s.assign(nt, 0.0);
  curve.stderr_.assign(nt, 0.0);
  for (std::size_t j = 0; j < nt; ++j) {
    double mean = 0.0;
    for (std::size_t idx = 0; idx < n_traj; ++idx) mean += psurv[idx * nt + j];
    mean /= static_cast<double>(n_traj);
    double var = 0.0;
    for (std::size_t idx = 0; idx < n_traj; ++idx) {
      const double d = psurv[idx * nt + j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n_traj - 1);
    curve.p_s[j] = std::min(1.0, std::max(0.0, mean));
    curve.stderr_[j] = std::sqrt(var / static_cast<double>(n_traj));
  }

  if (opts.n_shots > 0) {
    std::mt19937_64 rng(seed ^ kShotSalt);
    const double n_shots = static_cast<double>(opts.n_shots);
    for (std::size_t j = 0; j < nt; ++j) {
      std::binomial_distribution<int> shots(opts.n_shots, curve.p_s[j]);
      const double p_hat = static_cast<double>(shots(rng)) / n_shots;
      // The sampled value sits on the finite-ensemble mean, so both error
      // sources stack.
      const double mc_var = curve.stderr_[j] * curve.stderr_[j];
      curve.p_s[j] = p_hat;
      curve.stderr_[j] = std::max(std::sqrt(p_hat * (1.0 - p_hat) / n_shots + mc_var),
                                  0.5 / n_shots);
    }
  }

  curve.validate();
  return curve;
}

}  // namespace cddspec
