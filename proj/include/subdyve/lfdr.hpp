#pragma once

#include <span>
#include <string>
#include <vector>

namespace subdyve::lfdr {

// Binned Poisson-regression estimate of the marginal z-score density, used to
// evaluate local false discovery rates lfdr(z) = pi0 * f0(z) / f(z) against
// the standard-normal null.
struct LfdrModel {
  std::vector<double> bin_edges;  // B+1 edges over the fitted z range
  std::vector<double> beta;       // polynomial coefficients, rescaled basis
  double pi0 = 0.9;
  double ridge = 1e-4;
  double count_to_density = 1.0;  // n_samples * bin_width
  double z_lo = 0.0, z_hi = 1.0;  // rescale range for the polynomial basis

  bool fitted() const { return !beta.empty(); }
};

struct ZScoreResult {
  std::vector<double> z;
  double mu = 0.0;
  double sigma = 1.0;
};

struct FitOptions {
  int bins = 50;
  int poly_degree = 7;
  double ridge = 1e-4;
  double pi0 = 0.9;
  int max_newton_iter = 200;
  double grad_tol = 1e-8;
};

// Standardizes with the population convention (n divisor). Throws
// NumericError when fewer than 2 values or sigma < 1e-12.
ZScoreResult zscore(std::span<const double> logits);

// Bins z into equal-width bins and fits a penalized Poisson regression of the
// counts on polynomial bin-center features by damped Newton iteration.
LfdrModel fit(std::span<const double> z, const FitOptions& opts = {});

// Fitted marginal density f_hat(z) on the density scale.
double density(const LfdrModel& model, double z);

// pi0 * f0(z) / f_hat(z), clipped to [0, 1].
double evaluate(const LfdrModel& model, double z);

// Indices with evaluate(model, z[i]) <= tau.
std::vector<std::size_t> select(const LfdrModel& model, std::span<const double> z,
                                double tau);

// Standard normal density (the default null f0).
double null_pdf(double z);

// Text round trip; formats doubles with 17 significant digits so evaluate()
// reproduces bit-for-bit.
std::string serialize(const LfdrModel& model);
LfdrModel deserialize(const std::string& text);

}  // namespace subdyve::lfdr
