#pragma once

#include <vector>

#include "subdyve/simnet.hpp"

namespace subdyve::propagation {

// Restart-weighted diffusion source: p0 holds per-node seed weights and alpha
// the restart probability.
struct SeedVector {
  std::vector<double> p0;
  double alpha = 0.2;
};

// Iterates P <- (1-alpha) * W * P + alpha * P0 from P = P0 until the L1 step
// difference drops below tol or max_iter is reached. For alpha > 0 the map is
// a contraction with factor (1 - alpha). With alpha = 0 and no convergence, a
// NumericError carrying the final residual is thrown.
std::vector<double> propagate(const simnet::NormalizedAdjacency& wn,
                              const SeedVector& seed, double tol = 1e-9,
                              int max_iter = 1000, unsigned threads = 1);

// Dense stationary solve alpha * (I - (1-alpha) W)^-1 * p0 by Gaussian
// elimination; test oracle for small graphs (n <= 200).
std::vector<double> propagate_exact(const simnet::NormalizedAdjacency& wn,
                                    const SeedVector& seed);

}  // namespace subdyve::propagation
