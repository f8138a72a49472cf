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

#include "cddspec/levmar.hpp"

#include <cmath>
#include <stdexcept>

namespace cddspec {

namespace {

// Gaussian elimination with partial pivoting; a is row-major n x n,
// b the right-hand side. Returns false on (near-)singularity.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& out) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
    }
    if (std::abs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t row = col + 1; row < n; ++row) {
      const double factor = a[row * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[row * n + j] -= factor * a[col * n + j];
      b[row] -= factor * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double sum = b[i];
    for (std::size_t j = i + 1; j < n; ++j) sum -= a[i * n + j] * out[j];
    out[i] = sum / a[i * n + i];
  }
  return true;
}

bool invert_dense(const std::vector<double>& a, std::size_t n, std::vector<double>& inv) {
  inv.assign(n * n, 0.0);
  std::vector<double> col(n), e(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::fill(e.begin(), e.end(), 0.0);
    e[c] = 1.0;
    if (!solve_dense(a, e, n, col)) return false;
    for (std::size_t r = 0; r < n; ++r) inv[r * n + c] = col[r];
  }
  return true;
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

LmResult levmar_fit(const std::function<void(const std::vector<double>&, std::vector<double>&)>& residual_fn,
                    std::vector<double> x0, const std::vector<double>& lower,
                    const std::vector<double>& upper, const LmOptions& opts) {
  const std::size_t np = x0.size();
  if (lower.size() != np || upper.size() != np) {
    throw std::invalid_argument("levmar_fit: bound size mismatch");
  }

  std::vector<double> scales = opts.scales;
  if (scales.empty()) {
    scales.resize(np);
    for (std::size_t i = 0; i < np; ++i) scales[i] = std::max(std::abs(x0[i]), 1.0);
  }
  const auto clamp = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < np; ++i) x[i] = std::min(upper[i], std::max(lower[i], x[i]));
  };
  clamp(x0);

  std::vector<double> r;
  residual_fn(x0, r);
  const std::size_t nr = r.size();
  if (nr < np) throw std::invalid_argument("levmar_fit: fewer residuals than parameters");
  double chi2 = sum_sq(r);

  LmResult result;
  result.params = x0;
  double lambda = opts.lambda0;
  std::vector<double> jac(nr * np), rp(nr), rm(nr), jtj(np * np), jtr(np), step, trial(np),
      r_trial(nr);

  int it = 0;
  int stall = 0;
  for (; it < opts.max_iter; ++it) {
    // Central-difference Jacobian at the current point.
    for (std::size_t i = 0; i < np; ++i) {
      const double h = 1e-7 * scales[i];
      std::vector<double> xp = result.params, xm = result.params;
      xp[i] += h;
      xm[i] -= h;
      clamp(xp);
      clamp(xm);
      const double denom = xp[i] - xm[i];
      residual_fn(xp, rp);
      residual_fn(xm, rm);
      if (denom == 0.0) {
        for (std::size_t k = 0; k < nr; ++k) jac[k * np + i] = 0.0;
      } else {
        for (std::size_t k = 0; k < nr; ++k) jac[k * np + i] = (rp[k] - rm[k]) / denom;
      }
    }
    residual_fn(result.params, r);
    chi2 = sum_sq(r);

    for (std::size_t i = 0; i < np; ++i) {
      jtr[i] = 0.0;
      for (std::size_t j2 = i; j2 < np; ++j2) jtj[i * np + j2] = 0.0;
    }
    for (std::size_t k = 0; k < nr; ++k) {
      for (std::size_t i = 0; i < np; ++i) {
        const double jk = jac[k * np + i];
        jtr[i] += jk * r[k];
        for (std::size_t j2 = i; j2 < np; ++j2) jtj[i * np + j2] += jk * jac[k * np + j2];
      }
    }
    for (std::size_t i = 0; i < np; ++i) {
      for (std::size_t j2 = 0; j2 < i; ++j2) jtj[i * np + j2] = jtj[j2 * np + i];
    }

    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      std::vector<double> damped = jtj;
      for (std::size_t i = 0; i < np; ++i) {
        damped[i * np + i] += lambda * std::max(jtj[i * np + i], 1e-30);
      }
      std::vector<double> rhs(np);
      for (std::size_t i = 0; i < np; ++i) rhs[i] = -jtr[i];
      if (!solve_dense(damped, rhs, np, step)) {
        lambda *= 10.0;
        continue;
      }
      trial = result.params;
      for (std::size_t i = 0; i < np; ++i) trial[i] += step[i];
      clamp(trial);
      residual_fn(trial, r_trial);
      const double chi2_trial = sum_sq(r_trial);
      if (chi2_trial < chi2) {
        double max_rel_step = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
          max_rel_step = std::max(max_rel_step, std::abs(trial[i] - result.params[i]) / scales[i]);
        }
        const double rel_impr = (chi2 - chi2_trial) / std::max(chi2, 1e-300);
        result.params = trial;
        chi2 = chi2_trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel_impr < opts.ftol || max_rel_step < opts.xtol) {
          result.converged = true;
        }
        // Persistent sub-1e-8 improvements mean a residual-limited plateau.
        stall = rel_impr < 1e-8 ? stall + 1 : 0;
        if (stall >= 3) result.converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }

    if (!improved) {
      // No downhill step found: either at a minimum or stuck.
      result.converged = true;
      break;
    }
    if (result.converged) break;
  }

  result.n_iter = it + 1;
  result.chi2 = chi2;
  result.message = result.converged ? "converged" : "max iterations reached";

  // Covariance from the undamped normal equations at the solution.
  for (std::size_t i = 0; i < np; ++i) {
    const double h = 1e-7 * scales[i];
    std::vector<double> xp = result.params, xm = result.params;
    xp[i] += h;
    xm[i] -= h;
    clamp(xp);
    clamp(xm);
    const double denom = xp[i] - xm[i];
    residual_fn(xp, rp);
    residual_fn(xm, rm);
    if (denom == 0.0) {
      for (std::size_t k = 0; k < nr; ++k) jac[k * np + i] = 0.0;
    } else {
      for (std::size_t k = 0; k < nr; ++k) jac[k * np + i] = (rp[k] - rm[k]) / denom;
    }
  }
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j2 = 0; j2 < np; ++j2) {
      double s = 0.0;
      for (std::size_t k = 0; k < nr; ++k) s += jac[k * np + i] * jac[k * np + j2];
      jtj[i * np + j2] = s;
    }
  }
  if (!invert_dense(jtj, np, result.cov)) {
    result.cov.assign(np * np, 0.0);
    result.message += "; singular normal equations, covariance unavailable";
  }
  return result;
}

}  // namespace cddspec
