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

#include <cmath>

#include <doctest.h>

#include "cddspec/filter_analytics.hpp"
#include "cddspec/qubit_sim.hpp"

using cddspec::DecayCurve;
using cddspec::DriveConfig;
using cddspec::Frame;
using cddspec::LlnTone;
using cddspec::McOptions;
using cddspec::NoiseTrajectory;
using cddspec::PsdModel;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

std::vector<double> linspace_times(double t0, double t1, int n) {
  std::vector<double> out;
  for (int j = 0; j < n; ++j) {
    out.push_back(t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(n - 1));
  }
  return out;
}

NoiseTrajectory constant_trajectory(double value, double dt, std::size_t n) {
  NoiseTrajectory traj;
  traj.dt = dt;
  traj.samples.assign(n, value);
  return traj;
}

}  // namespace

TEST_SUITE("qubit-sim") {

TEST_CASE("zero noise in the rotating frame stays exactly on +X") {
  const auto traj = constant_trajectory(0.0, 1e-7, 4096);
  DriveConfig drive;
  drive.omega = kTwoPi * 100e3;
  drive.times = linspace_times(2e-5, 4e-4, 12);
  const auto states = cddspec::evolve_one(traj, drive, Frame::kRotating);
  for (const auto& s : states) {
    CHECK(s.x == 1.0);
    CHECK(s.y == 0.0);
    CHECK(s.z == 0.0);
  }
}

TEST_CASE("free precession: constant detuning with no drive gives cos(delta t)") {
  const double delta_a = kTwoPi * 4e3;
  const double dt = 1e-7;
  const auto traj = constant_trajectory(delta_a, dt, 1 << 13);
  DriveConfig drive;
  drive.omega = 0.0;  // Stark term folded into the trajectory
  drive.times = linspace_times(1e-5, 7e-4, 20);
  const auto states = cddspec::evolve_one(traj, drive, Frame::kLlnInteraction);
  for (std::size_t j = 0; j < states.size(); ++j) {
    CHECK(states[j].x == doctest::Approx(std::cos(delta_a * drive.times[j])).epsilon(1e-9));
    CHECK(states[j].y == doctest::Approx(std::sin(delta_a * drive.times[j])).epsilon(1e-9));
  }
}

TEST_CASE("static offset matches the closed-form tilted precession") {
  // b = (Omega, 0, f0) static in the lln frame: the +X projection is
  // x(t) = (Omega^2 + f0^2 cos(Omega_R t)) / Omega_R^2; the rotating-frame
  // propagation must agree since <sx> is frame-invariant.
  const double omega = kTwoPi * 60e3;
  const double f0 = kTwoPi * 4e3;  // f0 << Omega
  const double omega_r = std::hypot(omega, f0);
  const double dt = kTwoPi / (40.0 * omega);
  const auto traj = constant_trajectory(f0, dt, 1 << 12);
  DriveConfig drive;
  drive.omega = omega;
  drive.times = linspace_times(1e-5, 3e-4, 16);

  const auto rot = cddspec::evolve_one(traj, drive, Frame::kRotating);
  const auto lln = cddspec::evolve_one(traj, drive, Frame::kLlnInteraction);
  for (std::size_t j = 0; j < drive.times.size(); ++j) {
    const double t = drive.times[j];
    const double want = (omega * omega + f0 * f0 * std::cos(omega_r * t)) / (omega_r * omega_r);
    // lln frame solves the static field exactly up to step placement
    CHECK(lln[j].x == doctest::Approx(want).epsilon(5e-4));
    // rotating frame carries the counter-rotating correction O(f0/Omega)^2
    CHECK(rot[j].x == doctest::Approx(want).epsilon(2e-2));
    // first-order perturbative shape: 1 - 2 (f0/Omega_R)^2 sin^2(Omega_R t/2)
    const double pert = 1.0 - 2.0 * (f0 * f0 / (omega_r * omega_r)) *
                                  std::pow(std::sin(omega_r * t / 2.0), 2);
    CHECK(want == doctest::Approx(pert).epsilon(1e-12));
  }

  // Fine-step reference: halving dt moves the answer by < 1e-3.
  const auto traj_fine = constant_trajectory(f0, dt / 2.0, 1 << 13);
  const auto rot_fine = cddspec::evolve_one(traj_fine, drive, Frame::kRotating);
  for (std::size_t j = 0; j < drive.times.size(); ++j) {
    CHECK(std::abs(rot[j].x - rot_fine[j].x) < 1e-3);
  }
}

TEST_CASE("per-step norm preservation") {
  PsdModel psd = PsdModel::flat(5e4, 1.0, kTwoPi * 200e3);
  DriveConfig drive;
  drive.omega = kTwoPi * 50e3;
  drive.times = linspace_times(1e-5, 6e-4, 60);
  const auto traj = cddspec::synthesize(psd, kTwoPi / (20.0 * kTwoPi * 200e3), 4096, 11);
  const auto states = cddspec::evolve_one(traj, drive, Frame::kRotating);
  for (const auto& s : states) CHECK(std::abs(s.norm() - 1.0) < 1e-9);
}

TEST_CASE("evolve_one rejects bad inputs") {
  const auto traj = constant_trajectory(0.0, 1e-5, 64);
  DriveConfig drive;
  drive.omega = kTwoPi * 100e3;  // dt = 1e-5 >> 2pi/(20 Omega)
  drive.times = {1e-4};
  CHECK_THROWS(cddspec::evolve_one(traj, drive, Frame::kRotating));

  DriveConfig drive2;
  drive2.omega = kTwoPi * 1e3;
  drive2.times = {1.0};  // trajectory too short
  CHECK_THROWS(cddspec::evolve_one(traj, drive2, Frame::kRotating));
}

TEST_CASE("zero noise, zero Stark shift keeps survival at one") {
  PsdModel psd = PsdModel::flat(0.0, 1.0, kTwoPi * 100e3);
  DriveConfig drive;
  drive.omega = kTwoPi * 40e3;
  drive.times = linspace_times(2e-5, 5e-4, 10);
  const auto curve = cddspec::monte_carlo_decay(psd, drive, 8, 3);
  for (double p : curve.p_s) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero PSD with Stark shift oscillates as cos(delta_a t)") {
  PsdModel psd = PsdModel::flat(0.0, 1.0, kTwoPi * 100e3);
  DriveConfig drive;
  drive.omega = kTwoPi * 40e3;
  drive.stark_shift = kTwoPi * 5e3;
  drive.times = linspace_times(2e-5, 5e-4, 25);
  const auto curve = cddspec::monte_carlo_decay(psd, drive, 4, 3);
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    const double want = 0.5 + 0.5 * std::cos(drive.stark_shift * curve.times[j]);
    CHECK(curve.p_s[j] == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("flat-spectrum Monte Carlo follows the white-noise law") {
  const double s_w = 4000.0;
  PsdModel psd = PsdModel::flat(s_w, 1.0, kTwoPi * 150e3);
  DriveConfig drive;
  drive.omega = kTwoPi * 40e3;
  drive.times = linspace_times(5e-5, 7e-4, 8);
  const auto curve = cddspec::monte_carlo_decay(psd, drive, 600, 77);
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    const double want = 0.5 + 0.5 * std::exp(-0.5 * s_w * curve.times[j]);
    CHECK(std::abs(curve.p_s[j] - want) < 3.0 * curve.stderr_[j] + 0.01);
  }
}

TEST_CASE("resonant tone flops at omega_lln between 1 and 0") {
  const double omega_drive = kTwoPi * 81832.0;
  const double omega_lln = kTwoPi * 2842.0;
  PsdModel psd;
  psd.tones.push_back(LlnTone{omega_drive, omega_lln, 0.0});
  DriveConfig drive;
  drive.omega = omega_drive;
  drive.times = linspace_times(2e-5, 7e-4, 36);
  const auto curve = cddspec::monte_carlo_decay(psd, drive, 64, 5);
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    const double want = 0.5 + 0.5 * std::cos(omega_lln * curve.times[j]);
    CHECK(curve.p_s[j] == doctest::Approx(want).epsilon(0.02));
  }
}

TEST_CASE("rotating and lln-interaction frames agree statistically") {
  PsdModel psd = PsdModel::flat(2e3, 1.0, kTwoPi * 120e3);
  psd.tones.push_back(LlnTone{kTwoPi * 50e3, kTwoPi * 2e3, 0.0});
  DriveConfig drive;
  drive.omega = kTwoPi * 48e3;
  drive.times = linspace_times(5e-5, 6e-4, 10);

  McOptions rot_opts;
  rot_opts.frame = Frame::kRotating;
  McOptions lln_opts;
  lln_opts.frame = Frame::kLlnInteraction;
  const auto a = cddspec::monte_carlo_decay(psd, drive, 400, 21, rot_opts);
  const auto b = cddspec::monte_carlo_decay(psd, drive, 400, 22, lln_opts);
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    const double sigma = std::hypot(a.stderr_[j], b.stderr_[j]);
    CHECK(std::abs(a.p_s[j] - b.p_s[j]) < 3.0 * sigma + 0.01);
  }
}

TEST_CASE("Monte Carlo matches the analytic weak-noise prediction") {
  PsdModel psd;
  psd.grid = {kTwoPi * 1e3, kTwoPi * 30e3, kTwoPi * 60e3, kTwoPi * 150e3};
  psd.values = {3e3, 1.5e3, 2.5e3, 5e2};
  DriveConfig drive;
  drive.omega = kTwoPi * 45e3;
  drive.stark_shift = kTwoPi * 2.5e3;
  drive.times = linspace_times(5e-5, 8e-4, 9);

  const auto mc = cddspec::monte_carlo_decay(psd, drive, 800, 9);
  const auto an = cddspec::predict_decay(psd, drive.omega, drive.times, drive.stark_shift);
  for (std::size_t j = 0; j < mc.times.size(); ++j) {
    CHECK(std::abs(mc.p_s[j] - an.curve.p_s[j]) < 3.0 * mc.stderr_[j] + 0.01);
  }
}

TEST_CASE("serial and parallel execution are bit-identical") {
  PsdModel psd = PsdModel::flat(3e3, 1.0, kTwoPi * 100e3);
  psd.tones.push_back(LlnTone{kTwoPi * 30e3, kTwoPi * 1e3, 0.0});
  DriveConfig drive;
  drive.omega = kTwoPi * 33e3;
  drive.stark_shift = kTwoPi * 1e3;
  drive.times = linspace_times(5e-5, 4e-4, 12);

  McOptions serial;
  serial.exec = cddspec::Exec::kSerial;
  McOptions parallel;
  parallel.exec = cddspec::Exec::kParallel;
  const auto a = cddspec::monte_carlo_decay(psd, drive, 96, 1234, serial);
  const auto b = cddspec::monte_carlo_decay(psd, drive, 96, 1234, parallel);
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    CHECK(a.p_s[j] == b.p_s[j]);
    CHECK(a.stderr_[j] == b.stderr_[j]);
  }
}

TEST_CASE("halving dt moves survival by less than 1e-3") {
  PsdModel psd = PsdModel::flat(3e3, 1.0, kTwoPi * 80e3);
  DriveConfig drive;
  drive.omega = kTwoPi * 40e3;
  drive.times = linspace_times(1e-4, 6e-4, 6);

  McOptions coarse;
  coarse.points_per_period = 20.0;
  McOptions fine;
  fine.points_per_period = 40.0;
  const auto a = cddspec::monte_carlo_decay(psd, drive, 256, 55, coarse);
  const auto b = cddspec::monte_carlo_decay(psd, drive, 256, 55, fine);
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    CHECK(std::abs(a.p_s[j] - b.p_s[j]) < 1e-3);
  }
}

TEST_CASE("binomial shot sampling quantizes p and bounds stderr") {
  PsdModel psd = PsdModel::flat(2e3, 1.0, kTwoPi * 80e3);
  DriveConfig drive;
  drive.omega = kTwoPi * 30e3;
  drive.times = linspace_times(5e-5, 5e-4, 8);
  McOptions opts;
  opts.n_shots = 200;
  const auto curve = cddspec::monte_carlo_decay(psd, drive, 64, 17, opts);
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    const double scaled = curve.p_s[j] * 200.0;
    CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
    CHECK(curve.stderr_[j] >= 0.5 / 200.0);
  }
}

TEST_CASE("monte_carlo_decay validates inputs") {
  PsdModel psd = PsdModel::flat(1.0, 1.0, 1e5);
  DriveConfig drive;
  drive.omega = kTwoPi * 30e3;
  drive.times = {1e-4};
  CHECK_THROWS(cddspec::monte_carlo_decay(psd, drive, 1, 0));  // n_traj < 2
  DriveConfig no_drive = drive;
  no_drive.omega = 0.0;
  CHECK_THROWS(cddspec::monte_carlo_decay(psd, no_drive, 8, 0));
  DriveConfig bad_times = drive;
  bad_times.times = {2e-4, 1e-4};
  CHECK_THROWS(cddspec::monte_carlo_decay(psd, bad_times, 8, 0));
}

}  // TEST_SUITE
