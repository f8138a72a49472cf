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

// Compares the serial reference kernels against their OpenMP versions and
// verifies the ordered reductions keep them bit-identical.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "cddspec/beatnote.hpp"
#include "cddspec/estimator.hpp"
#include "cddspec/filter_analytics.hpp"
#include "cddspec/qubit_sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cddspec;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_ms(F&& fn, int reps) {
  const double t0 = now_ms();
  for (int r = 0; r < reps; ++r) fn();
  return (now_ms() - t0) / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s %10.1f ms %10.1f ms %8.2fx   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel == serial\n");
#endif
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    PsdModel psd = PsdModel::flat(3e3, 1.0, kTwoPi * 150e3);
    psd.tones.push_back({kTwoPi * 50e3, kTwoPi * 2e3, 0.0});
    DriveConfig drive;
    drive.omega = kTwoPi * 48e3;
    drive.stark_shift = kTwoPi * 2e3;
    for (int j = 1; j <= 24; ++j) drive.times.push_back(4e-5 * j);

    McOptions serial;
    serial.exec = Exec::kSerial;
    McOptions parallel;
    parallel.exec = Exec::kParallel;
    DecayCurve a, b;
    const double ts = time_ms([&] { a = monte_carlo_decay(psd, drive, 384, 7, serial); }, 1);
    const double tp = time_ms([&] { b = monte_carlo_decay(psd, drive, 384, 7, parallel); }, 1);
    report("monte_carlo_decay", ts, tp, a.p_s == b.p_s && a.stderr_ == b.stderr_);
  }

  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> grid;
    for (int i = 0; i <= 80; ++i) grid.push_back(kTwoPi * (2e3 + 600.0 * i));
    PsdModel truth;
    truth.grid = grid;
    for (std::size_t i = 0; i < grid.size(); ++i) truth.values.push_back(1e3 + 4e3 * u(rng));

    std::vector<DecayCurve> curves;
    std::vector<double> delta_a;
    for (int c = 0; c < 24; ++c) {
      const double omega = kTwoPi * (6e3 + 1.7e3 * c);
      std::vector<double> times;
      for (int j = 1; j <= 30; ++j) times.push_back(3e-5 * j);
      auto pred = predict_decay(truth, omega, times, 0.0);
      pred.curve.stderr_.assign(times.size(), 1e-2);
      curves.push_back(pred.curve);
      delta_a.push_back(0.0);
    }
    PsdModel init = truth;
    for (auto& v : init.values) v *= 1.5;
    auto problem = ReconstructionProblem::build(curves, delta_a, grid, init);

    std::vector<double> gs, gp;
    problem.exec = Exec::kSerial;
    const double ts = time_ms([&] { gs = gradient_of_objective(problem, init.values); }, 20);
    problem.exec = Exec::kParallel;
    const double tp = time_ms([&] { gp = gradient_of_objective(problem, init.values); }, 20);
    report("gradient_of_objective", ts, tp, gs == gp);
  }

  {
    BeatnoteConfig cfg;
    cfg.s1 = PsdModel::flat(1.2e4, 1.0, kTwoPi * 400e3);
    cfg.omega0 = kTwoPi * 30e3;
    cfg.tau_max = 3e-3;
    cfg.tau_count = 8192;
    for (int i = 0; i < 2001; ++i) {
      cfg.omegas.push_back(cfg.omega0 + kTwoPi * (-20e3 + 20.0 * i));
    }
    BeatnoteSpectrum a, b;
    const double ts = time_ms([&] { a = simulate_beatnote(cfg, Exec::kSerial); }, 1);
    const double tp = time_ms([&] { b = simulate_beatnote(cfg, Exec::kParallel); }, 1);
    report("simulate_beatnote", ts, tp, a.values == b.values);
  }

  return 0;
}
