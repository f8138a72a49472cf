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

using cddspec::chi_integral;
using cddspec::filter_function;
using cddspec::FilterSpec;
using cddspec::LlnTone;
using cddspec::PsdModel;
using cddspec::QuadOptions;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

TEST_SUITE("filter-analytics") {

TEST_CASE("peak value is t^2/(4 pi) for large Omega t") {
  const FilterSpec spec{kTwoPi * 100e3, 1e-3};  // Omega t ~ 628
  const double peak = filter_function(spec.omega_drive, spec);
  CHECK(peak == doctest::Approx(spec.t * spec.t / (4.0 * kPi)).epsilon(1e-4));
}

TEST_CASE("even in omega") {
  const FilterSpec spec{kTwoPi * 50e3, 2e-4};
  for (double w : {0.0, 1e4, 3.3e5, 1e6}) {
    CHECK(filter_function(w, spec) == doctest::Approx(filter_function(-w, spec)).epsilon(1e-15));
  }
}

TEST_CASE("half-max points of the dominant lobe sit at 2.78311/t") {
  // sinc^2(u) = 1/2 at u = 1.39155737825; |omega - Omega| = 2u/t.
  const double t = 5e-4;
  const double omega_drive = kTwoPi * 120e3;  // Omega t = 377
  const FilterSpec spec{omega_drive, t};
  const double half = filter_function(omega_drive, spec) / 2.0;

  const auto crossing_above = [&](double lo, double hi) {
    // F decreasing from > half at lo to < half at hi
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (filter_function(mid, spec) > half) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const auto crossing_below = [&](double lo, double hi) {
    // F increasing from < half at lo to > half at hi
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (filter_function(mid, spec) < half) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const double up = crossing_above(omega_drive, omega_drive + kPi / t);
  const double down = crossing_below(omega_drive - kPi / t, omega_drive);
  const double expect = 2.0 * 1.39155737825151 / t;
  CHECK(up - omega_drive == doctest::Approx(expect).epsilon(0.02));
  CHECK(omega_drive - down == doctest::Approx(expect).epsilon(0.02));
  // Literal FWHM is 0.8859 * (2 pi / t), not 2 pi / t.
  CHECK(up - down == doctest::Approx(0.885894 * kTwoPi / t).epsilon(0.02));
}

TEST_CASE("equivalent lobe width is 2 pi / t") {
  // integral_0^inf F domega == t/2 exactly, so the peak-normalized width is
  // (t/2) / (t^2/4pi) = 2 pi / t.
  const double t = 4e-4;
  const double omega_drive = kTwoPi * 150e3;
  PsdModel ones = PsdModel::flat(1.0, 1.0, kTwoPi * 1e6);
  const double integral = chi_integral(ones, omega_drive, t);
  CHECK(integral == doctest::Approx(t / 2.0).epsilon(1e-3));
  const double width = integral / filter_function(omega_drive, FilterSpec{omega_drive, t});
  CHECK(width == doctest::Approx(kTwoPi / t).epsilon(0.02));
}

TEST_CASE("zero spectrum predicts the bare Stark oscillation") {
  PsdModel zero = PsdModel::flat(0.0, 1.0, 1e6);
  const double delta_a = kTwoPi * 3e3;
  std::vector<double> times;
  for (int j = 1; j <= 40; ++j) times.push_back(1e-5 * j);
  const auto pred = cddspec::predict_decay(zero, kTwoPi * 50e3, times, delta_a);
  for (std::size_t j = 0; j < times.size(); ++j) {
    CHECK(pred.curve.p_s[j] ==
          doctest::Approx(0.5 + 0.5 * std::cos(delta_a * times[j])).epsilon(1e-12));
    CHECK(pred.chi[j] == 0.0);
  }
}

TEST_CASE("flat spectrum decays at S_w/2") {
  const double s_w = 3000.0;
  PsdModel psd = PsdModel::flat(s_w, 1.0, kTwoPi * 2e6);
  const double omega_drive = kTwoPi * 80e3;
  std::vector<double> times;
  for (int j = 1; j <= 16; ++j) times.push_back(5e-5 * j);
  const auto pred = cddspec::predict_decay(psd, omega_drive, times, 0.0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double want = 0.5 + 0.5 * std::exp(-0.5 * s_w * times[j]);
    CHECK(pred.curve.p_s[j] == doctest::Approx(want).epsilon(0.005));
  }
}

TEST_CASE("quadrature is grid-converged to 1e-4") {
  PsdModel psd;
  psd.grid = {kTwoPi * 1e3, kTwoPi * 20e3, kTwoPi * 23.5e3, kTwoPi * 27e3, kTwoPi * 200e3};
  psd.values = {4e4, 6e3, 7e4, 6e3, 2e3};
  const double omega_drive = kTwoPi * 23e3;
  const double t = 6e-4;

  QuadOptions coarse;  // defaults
  QuadOptions fine;
  fine.points_per_lobe = 2.0 * coarse.points_per_lobe;
  fine.lobes_past_peak = 2.0 * coarse.lobes_past_peak;
  const double chi_coarse = chi_integral(psd, omega_drive, t, coarse);
  const double chi_fine = chi_integral(psd, omega_drive, t, fine);
  CHECK(std::abs(chi_fine - chi_coarse) / chi_fine < 1e-4);
}

TEST_CASE("paper-scale resonant tone saturates Eq.-2 at one half") {
  // Delta weight 4.007e9 rad^2/Hz at Omega: chi = (omega_lln t)^2 >> 1 at
  // t = 200 us, so the second-cumulant survival floors at 0.5 while the true
  // dressed dynamics would dive below it.
  PsdModel psd;
  psd.tones.push_back(LlnTone{kTwoPi * 81832.0, kTwoPi * 2842.0, 0.0});
  std::vector<double> times = {5e-5, 1e-4, 2e-4, 4e-4};
  const auto pred = cddspec::predict_decay(psd, kTwoPi * 81832.0, times, 0.0);
  for (std::size_t j = 0; j < times.size(); ++j) CHECK(pred.curve.p_s[j] >= 0.5);
  CHECK(std::abs(pred.curve.p_s[2] - 0.5) < 2e-3);
  CHECK(pred.deep_decay[2] == 1);
}

TEST_CASE("survival stays within [1/2, 1] for any PSD when delta_a = 0") {
  PsdModel psd;
  psd.grid = {1.0, 1e4, 5e5};
  psd.values = {1e5, 2e4, 1e3};
  psd.tones.push_back(LlnTone{kTwoPi * 40e3, kTwoPi * 1e3, 0.0});
  std::vector<double> times;
  for (int j = 1; j <= 30; ++j) times.push_back(4e-5 * j);
  const auto pred = cddspec::predict_decay(psd, kTwoPi * 35e3, times, 0.0);
  for (double p : pred.curve.p_s) {
    CHECK(p >= 0.5);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("weights reproduce chi exactly for grid-defined spectra") {
  PsdModel psd;
  psd.grid = {kTwoPi * 2e3, kTwoPi * 10e3, kTwoPi * 40e3, kTwoPi * 90e3};
  psd.values = {5e4, 1e4, 3e4, 2e3};
  const double omega_drive = kTwoPi * 30e3;
  const double t = 3e-4;

  const auto w = cddspec::filter_weights(psd.grid, omega_drive, t);
  double chi_w = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) chi_w += w[i] * psd.values[i];
  const double chi_direct = chi_integral(psd, omega_drive, t);
  CHECK(chi_w == doctest::Approx(chi_direct).epsilon(1e-12));
}

TEST_CASE("sinc handles the removable singularity") {
  CHECK(cddspec::sinc(0.0) == 1.0);
  CHECK(cddspec::sinc(1e-9) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cddspec::sinc(kPi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cddspec::sinc(1.0) == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
}

}  // TEST_SUITE
