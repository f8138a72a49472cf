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

#include "cddspec/psd_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cddspec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double tone_delta_weight(const LlnTone& tone) {
  const double e0 = 2.0 * tone.omega_lln;
  return kPi * e0 * e0 / 2.0;
}

void PsdModel::validate() const {
  if (grid.size() != values.size()) {
    throw std::invalid_argument("PsdModel: grid/values size mismatch");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
      throw std::invalid_argument("PsdModel: grid must be finite and >= 0");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw std::invalid_argument("PsdModel: grid must be strictly ascending");
    }
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw std::invalid_argument("PsdModel: values must be finite and >= 0");
    }
  }
  if (interpolation != "linear") {
    throw std::invalid_argument("PsdModel: unknown interpolation rule '" + interpolation + "'");
  }
  for (const auto& t : tones) {
    if (!std::isfinite(t.omega0) || t.omega0 < 0.0 || !std::isfinite(t.omega_lln) ||
        t.omega_lln < 0.0 || !std::isfinite(t.phi0)) {
      throw std::invalid_argument("PsdModel: invalid tone");
    }
  }
}

double PsdModel::evaluate(double omega) const {
  if (grid.empty()) return 0.0;
  if (omega <= grid.front()) return values.front();
  if (omega >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), omega);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double frac = (omega - grid[lo]) / (grid[hi] - grid[lo]);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PsdModel PsdModel::flat(double level, double omega_lo, double omega_hi) {
  PsdModel psd;
  psd.grid = {omega_lo, omega_hi};
  psd.values = {level, level};
  psd.validate();
  return psd;
}

}  // namespace cddspec
