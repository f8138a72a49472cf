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

#ifndef CDDSPEC_LEVMAR_HPP
#define CDDSPEC_LEVMAR_HPP

#include <functional>
#include <string>
#include <vector>

namespace cddspec {

struct LmOptions {
  int max_iter = 400;
  double ftol = 1e-14;      // relative chi^2 improvement
  double xtol = 1e-12;      // relative step size
  double lambda0 = 1e-3;
  /// Per-parameter scale for the numeric Jacobian and xtol test; defaults to
  /// max(|x_i|, 1).
  std::vector<double> scales;
};

struct LmResult {
  std::vector<double> params;
  std::vector<double> cov;  // row-major n x n, (J^T J)^-1 at the solution
  double chi2 = 0.0;        // sum of squared residuals
  int n_iter = 0;
  bool converged = false;
  std::string message;
};

/// Damped least squares with numeric central-difference Jacobian and box
/// constraints enforced by clamping trial points. residual_fn fills r(theta);
/// weighting is the caller's job (divide by sigma).
LmResult levmar_fit(const std::function<void(const std::vector<double>&, std::vector<double>&)>& residual_fn,
                    std::vector<double> x0, const std::vector<double>& lower,
                    const std::vector<double>& upper, const LmOptions& opts = {});

}  // namespace cddspec

#endif  // CDDSPEC_LEVMAR_HPP
