#include "subdyve/propagation.hpp"

#include <cmath>
#include <string>

#include "subdyve/errors.hpp"
#include "subdyve/kernels.hpp"

namespace subdyve::propagation {

std::vector<double> propagate(const simnet::NormalizedAdjacency& wn,
                              const SeedVector& seed, double tol, int max_iter,
                              unsigned threads) {
  const std::size_t n = static_cast<std::size_t>(wn.n);
  if (seed.p0.size() != n) throw DataError("propagate: seed length != node count");
  if (tol <= 0.0) throw ConfigError("propagate: tol must be positive");
  if (seed.alpha < 0.0 || seed.alpha > 1.0) {
    throw ConfigError("propagate: alpha outside [0, 1]");
  }
  for (double v : seed.p0) {
    if (!std::isfinite(v) || v < 0.0) throw DataError("propagate: seed weights must be finite and >= 0");
  }

  if (seed.alpha == 1.0) return seed.p0;  // pure restart

  // Isolated nodes act as their own neighborhood (implicit self-loop), so
  // their stationary value is the seed weight itself rather than alpha times
  // it. The persisted W_N keeps its zero columns; the fix lives here.
  std::vector<std::size_t> isolated;
  for (std::size_t i = 0; i < n; ++i) {
    if (wn.row_ptr[i] == wn.row_ptr[i + 1]) isolated.push_back(i);
  }

  std::vector<double> p = seed.p0;
  std::vector<double> wp(n, 0.0);
  std::vector<double> next(n, 0.0);
  double residual = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    wn.multiply(p, wp, threads);
    for (std::size_t i : isolated) wp[i] = p[i];
    kernels::combine(1.0 - seed.alpha, wp.data(), seed.alpha, seed.p0.data(),
                     next.data(), n);
    residual = kernels::l1_diff(next.data(), p.data(), n);
    p.swap(next);
    if (residual < tol) return p;
  }
  if (seed.alpha == 0.0) {
    throw NumericError("propagate: no convergence after " + std::to_string(max_iter) +
                           " iterations at alpha = 0",
                       residual);
  }
  return p;
}

std::vector<double> propagate_exact(const simnet::NormalizedAdjacency& wn,
                                    const SeedVector& seed) {
  const std::size_t n = static_cast<std::size_t>(wn.n);
  if (seed.p0.size() != n) throw DataError("propagate_exact: seed length != node count");
  if (seed.alpha == 1.0) return seed.p0;
  if (seed.alpha <= 0.0) {
    throw NumericError("propagate_exact: stationary system is singular at alpha = 0");
  }

  // A = I - (1-alpha) W, dense; solve A x = alpha * p0. Isolated nodes carry
  // an implicit self-loop, matching the iterative solver.
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (wn.row_ptr[i] == wn.row_ptr[i + 1]) {
      a[i * n + i] -= (1.0 - seed.alpha);
      continue;
    }
    for (int p = wn.row_ptr[i]; p < wn.row_ptr[i + 1]; ++p) {
      const auto j = static_cast<std::size_t>(wn.col_idx[static_cast<std::size_t>(p)]);
      a[i * n + j] -= (1.0 - seed.alpha) * wn.values[static_cast<std::size_t>(p)];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = seed.alpha * seed.p0[i];

  // Gaussian elimination with partial pivoting.
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    double best_abs = std::fabs(a[piv[col] * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a[piv[r] * n + col]);
      if (v > best_abs) {
        best = r;
        best_abs = v;
      }
    }
    if (best_abs < 1e-14) {
      throw NumericError("propagate_exact: singular stationary system");
    }
    std::swap(piv[col], piv[best]);
    const std::size_t prow = piv[col];
    const double inv = 1.0 / a[prow * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::size_t row = piv[r];
      const double f = a[row * n + col] * inv;
      if (f == 0.0) continue;
      a[row * n + col] = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a[row * n + c] -= f * a[prow * n + c];
      x[row] -= f * x[prow];
    }
  }
  std::vector<double> sol(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    const std::size_t row = piv[ri];
    double acc = x[row];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[row * n + c] * sol[c];
    sol[ri] = acc / a[row * n + ri];
  }
  return sol;
}

}  // namespace subdyve::propagation
