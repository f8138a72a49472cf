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

#include "cddspec/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cddspec {

void ZeemanTransition::validate() const {
  if (std::abs(std::abs(m_s) - 0.5) > 1e-12) {
    throw std::invalid_argument("ZeemanTransition: |m_s| must be 1/2");
  }
  if (std::abs(m_d) > 2.5 + 1e-12 || std::abs(std::remainder(m_d, 0.5)) > 1e-12 ||
      std::abs(std::remainder(m_d, 1.0)) < 1e-12) {
    throw std::invalid_argument("ZeemanTransition: m_d must be a half-integer in [-5/2, 5/2]");
  }
  if (!(g_s > 0.0) || !(g_d > 0.0)) throw std::invalid_argument("ZeemanTransition: bad g factors");
}

double sensitivity(const ZeemanTransition& tr) { return tr.g_d * tr.m_d - tr.g_s * tr.m_s; }

DiscriminationResult discriminate(const PsdModel& s13, const PsdModel& s12,
                                  const ZeemanTransition& tr13, const ZeemanTransition& tr12) {
  s13.validate();
  s12.validate();
  tr13.validate();
  tr12.validate();
  if (s13.grid.empty() || s12.grid.empty()) {
    throw std::invalid_argument("discriminate: empty spectrum");
  }
  const double lo = std::max(s13.grid.front(), s12.grid.front());
  const double hi = std::min(s13.grid.back(), s12.grid.back());
  if (!(lo < hi)) throw std::invalid_argument("discriminate: spectra grids do not overlap");

  std::vector<double> grid;
  grid.reserve(s13.grid.size() + s12.grid.size());
  for (double w : s13.grid) {
    if (w >= lo && w <= hi) grid.push_back(w);
  }
  for (double w : s12.grid) {
    if (w >= lo && w <= hi) grid.push_back(w);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return b - a <= 1e-12 * std::max(b, 1.0); }),
             grid.end());

  const double k12 = sensitivity(tr12);
  const double k13 = sensitivity(tr13);
  const double k2_diff = k13 * k13 - k12 * k12;
  if (std::abs(k2_diff) < 1e-12) {
    throw std::invalid_argument("discriminate: transitions have equal magnetic sensitivity");
  }
  const double scale_b = kMuBOverHbar * kMuBOverHbar;

  DiscriminationResult out;
  out.s_laser.grid = grid;
  out.s_magnetic.grid = grid;
  out.s_laser.values.reserve(grid.size());
  out.s_magnetic.values.reserve(grid.size());
  out.clamped_laser.assign(grid.size(), 0);
  out.clamped_magnetic.assign(grid.size(), 0);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v13 = s13.evaluate(grid[i]);
    const double v12 = s12.evaluate(grid[i]);
    const double diff = v13 - v12;
    double sb = diff / (k2_diff * scale_b);
    double sl = v12 - diff * (k12 * k12) / k2_diff;
    if (sb < 0.0) {
      sb = 0.0;
      out.clamped_magnetic[i] = 1;
    }
    if (sl < 0.0) {
      sl = 0.0;
      out.clamped_laser[i] = 1;
    }
    out.s_magnetic.values.push_back(sb);
    out.s_laser.values.push_back(sl);
  }
  out.s_laser.tones = s12.tones;  // laser tones are common mode
  out.s_laser.validate();
  out.s_magnetic.validate();
  return out;
}

PsdModel compose_transition_psd(const PsdModel& s_laser, const PsdModel& s_magnetic,
                                const ZeemanTransition& tr) {
  s_laser.validate();
  s_magnetic.validate();
  tr.validate();
  const double k = sensitivity(tr);
  const double scale = k * k * kMuBOverHbar * kMuBOverHbar;

  std::vector<double> grid = s_laser.grid;
  for (double w : s_magnetic.grid) grid.push_back(w);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return b - a <= 1e-12 * std::max(b, 1.0); }),
             grid.end());

  PsdModel out;
  out.grid = grid;
  out.values.reserve(grid.size());
  for (double w : grid) out.values.push_back(s_laser.evaluate(w) + scale * s_magnetic.evaluate(w));
  out.tones = s_laser.tones;
  out.validate();
  return out;
}

}  // namespace cddspec
