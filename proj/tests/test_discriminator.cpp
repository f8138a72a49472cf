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

#include "cddspec/discriminator.hpp"

using cddspec::compose_transition_psd;
using cddspec::discriminate;
using cddspec::kMuBOverHbar;
using cddspec::PsdModel;
using cddspec::sensitivity;
using cddspec::ZeemanTransition;

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

TEST_SUITE("discriminator") {

TEST_CASE("sensitivity factors of the probe transitions") {
  const ZeemanTransition tr12{-0.5, -0.5};
  const ZeemanTransition tr13{-0.5, -2.5};
  CHECK(sensitivity(tr12) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(sensitivity(tr13) == doctest::Approx(-2.0).epsilon(1e-15));

  const double k12 = sensitivity(tr12);
  const double k13 = sensitivity(tr13);
  CHECK(k12 * k12 == doctest::Approx(0.16).epsilon(1e-15));
  CHECK(k13 * k13 - k12 * k12 == doctest::Approx(24.0 * 0.16).epsilon(1e-15));
}

TEST_CASE("hypothetical m = m' = 0 transition has zero sensitivity") {
  const ZeemanTransition tr{0.0, 0.0};
  CHECK(sensitivity(tr) == 0.0);
}

TEST_CASE("compose then discriminate is the identity") {
  PsdModel s_laser;
  s_laser.grid = {kTwoPi * 1e3, kTwoPi * 20e3, kTwoPi * 100e3};
  s_laser.values = {3e4, 1e4, 2e3};
  PsdModel s_mag;  // T^2/Hz
  s_mag.grid = {kTwoPi * 1e3, kTwoPi * 10e3, kTwoPi * 100e3};
  s_mag.values = {4e-15, 1e-15, 2e-16};

  const ZeemanTransition tr12{-0.5, -0.5};
  const ZeemanTransition tr13{-0.5, -2.5};
  const auto s12 = compose_transition_psd(s_laser, s_mag, tr12);
  const auto s13 = compose_transition_psd(s_laser, s_mag, tr13);
  const auto out = discriminate(s13, s12);

  for (std::size_t i = 0; i < out.s_laser.grid.size(); ++i) {
    const double w = out.s_laser.grid[i];
    CHECK(out.s_laser.values[i] == doctest::Approx(s_laser.evaluate(w)).epsilon(1e-12));
    CHECK(out.s_magnetic.values[i] == doctest::Approx(s_mag.evaluate(w)).epsilon(1e-12));
    CHECK(out.clamped_laser[i] == 0);
    CHECK(out.clamped_magnetic[i] == 0);
  }
}

TEST_CASE("equal spectra mean zero magnetic noise") {
  PsdModel s;
  s.grid = {kTwoPi * 1e3, kTwoPi * 50e3};
  s.values = {5e3, 1e3};
  const auto out = discriminate(s, s);
  for (std::size_t i = 0; i < out.s_magnetic.values.size(); ++i) {
    CHECK(out.s_magnetic.values[i] == 0.0);
    CHECK(out.s_laser.values[i] == doctest::Approx(s.evaluate(out.s_laser.grid[i])).epsilon(1e-12));
  }
}

TEST_CASE("fitting noise that flips the difference sign is clamped and flagged") {
  PsdModel s12;
  s12.grid = {kTwoPi * 1e3, kTwoPi * 10e3};
  s12.values = {5e3, 5e3};
  PsdModel s13;  // BELOW s12: impossible physically, possible from fit noise
  s13.grid = s12.grid;
  s13.values = {4e3, 4e3};
  const auto out = discriminate(s13, s12);
  for (std::size_t i = 0; i < out.s_magnetic.values.size(); ++i) {
    CHECK(out.s_magnetic.values[i] == 0.0);
    CHECK(out.clamped_magnetic[i] == 1);
  }
}

TEST_CASE("printed discrimination algebra matches the generic inversion") {
  // S_dB = (S13 - S12) hbar^2 / (24 x 0.16 muB^2); S_L = S12 - (S13 - S12)/24.
  PsdModel s12, s13;
  s12.grid = {kTwoPi * 5e3};
  s13.grid = {kTwoPi * 5e3};
  s12.values = {7.5e3};
  s13.values = {12.0e3};
  // Single-point grids do not overlap as ranges; widen slightly.
  s12.grid = {kTwoPi * 4e3, kTwoPi * 6e3};
  s12.values = {7.5e3, 7.5e3};
  s13.grid = {kTwoPi * 4e3, kTwoPi * 6e3};
  s13.values = {12.0e3, 12.0e3};

  const auto out = discriminate(s13, s12);
  const double diff = 12.0e3 - 7.5e3;
  const double want_b = diff / (24.0 * 0.16 * kMuBOverHbar * kMuBOverHbar);
  const double want_l = 7.5e3 - diff / 24.0;
  for (std::size_t i = 0; i < out.s_laser.grid.size(); ++i) {
    CHECK(out.s_magnetic.values[i] == doctest::Approx(want_b).epsilon(1e-14));
    CHECK(out.s_laser.values[i] == doctest::Approx(want_l).epsilon(1e-14));
  }
}

TEST_CASE("non-overlapping grids are rejected") {
  PsdModel a, b;
  a.grid = {1.0, 2.0};
  a.values = {1.0, 1.0};
  b.grid = {3.0, 4.0};
  b.values = {1.0, 1.0};
  CHECK_THROWS(discriminate(a, b));
}

TEST_CASE("transition validation") {
  CHECK_THROWS(ZeemanTransition{0.3, -0.5}.validate());   // m_s not +-1/2
  CHECK_THROWS(ZeemanTransition{-0.5, 3.5}.validate());   // out of D_5/2 range
  CHECK_THROWS(ZeemanTransition{-0.5, -1.0}.validate());  // integer m_d
  ZeemanTransition ok{-0.5, -2.5};
  ok.validate();
}

TEST_CASE("laser tones survive composition and discrimination") {
  PsdModel s_laser;
  s_laser.grid = {kTwoPi * 1e3, kTwoPi * 100e3};
  s_laser.values = {1e3, 1e3};
  s_laser.tones.push_back({kTwoPi * 81.832e3, kTwoPi * 2.842e3, 0.0});
  PsdModel s_mag;
  s_mag.grid = s_laser.grid;
  s_mag.values = {1e-15, 1e-16};

  const auto s12 = compose_transition_psd(s_laser, s_mag, ZeemanTransition{-0.5, -0.5});
  REQUIRE(s12.tones.size() == 1);
  const auto s13 = compose_transition_psd(s_laser, s_mag, ZeemanTransition{-0.5, -2.5});
  const auto out = discriminate(s13, s12);
  REQUIRE(out.s_laser.tones.size() == 1);
  CHECK(out.s_laser.tones[0].omega0 == doctest::Approx(kTwoPi * 81.832e3));
}

}  // TEST_SUITE
