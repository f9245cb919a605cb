#include "subdyve/lfdr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "subdyve/errors.hpp"

namespace subdyve::lfdr {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Polynomial features of t in [-1, 1]: (1, t, t^2, ..., t^d).
void poly_features(double t, int degree, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(degree) + 1);
  double p = 1.0;
  for (int k = 0; k <= degree; ++k) {
    out[static_cast<std::size_t>(k)] = p;
    p *= t;
  }
}

double rescale(double z, double lo, double hi) {
  return 2.0 * (z - lo) / (hi - lo) - 1.0;
}

// Penalized Poisson negative log-likelihood (dropping the constant log(N_j!)
// terms): sum_j [exp(eta_j) - N_j * eta_j] + ridge/2 * |beta|^2.
double objective(const std::vector<std::vector<double>>& x,
                 const std::vector<double>& counts, const std::vector<double>& beta,
                 double ridge) {
  double obj = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double eta = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) eta += x[j][k] * beta[k];
    eta = std::min(eta, 700.0);
    obj += std::exp(eta) - counts[j] * eta;
  }
  double b2 = 0.0;
  for (double b : beta) b2 += b * b;
  return obj + 0.5 * ridge * b2;
}

// Solves the symmetric positive-definite system H s = g by Cholesky.
std::vector<double> solve_spd(std::vector<std::vector<double>> h, std::vector<double> g) {
  const std::size_t m = g.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = h[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= h[i][k] * h[j][k];
      if (i == j) {
        if (sum <= 0.0) throw NumericError("lfdr fit: Hessian not positive definite");
        h[i][i] = std::sqrt(sum);
      } else {
        h[i][j] = sum / h[j][j];
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double sum = g[i];
    for (std::size_t k = 0; k < i; ++k) sum -= h[i][k] * g[k];
    g[i] = sum / h[i][i];
  }
  for (std::size_t ii = m; ii-- > 0;) {
    double sum = g[ii];
    for (std::size_t k = ii + 1; k < m; ++k) sum -= h[k][ii] * g[k];
    g[ii] = sum / h[ii][ii];
  }
  return g;
}

}  // namespace

double null_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

ZScoreResult zscore(std::span<const double> logits) {
  if (logits.size() < 2) throw NumericError("zscore: need at least 2 values");
  double mu = 0.0;
  for (double v : logits) mu += v;
  mu /= static_cast<double>(logits.size());
  double var = 0.0;
  for (double v : logits) var += (v - mu) * (v - mu);
  var /= static_cast<double>(logits.size());
  const double sigma = std::sqrt(var);
  if (sigma < 1e-12) {
    throw NumericError("zscore: logits are (near-)constant, scores degenerate", sigma);
  }
  ZScoreResult r;
  r.mu = mu;
  r.sigma = sigma;
  r.z.reserve(logits.size());
  for (double v : logits) r.z.push_back((v - mu) / sigma);
  return r;
}

LfdrModel fit(std::span<const double> z, const FitOptions& opts) {
  if (z.size() < 2) throw NumericError("lfdr fit: need at least 2 samples");
  if (opts.bins < 2) throw ConfigError("lfdr fit: need at least 2 bins");
  if (opts.poly_degree < 1) throw ConfigError("lfdr fit: polynomial degree must be >= 1");
  if (opts.pi0 <= 0.0 || opts.pi0 > 1.0) throw ConfigError("lfdr fit: pi0 outside (0, 1]");
  if (opts.ridge < 0.0) throw ConfigError("lfdr fit: ridge must be >= 0");

  double lo = z[0], hi = z[0];
  for (double v : z) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) {
    throw NumericError("lfdr fit: all z-scores fall in a single point, degenerate support");
  }

  const int bins = opts.bins;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double v : z) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
  }

  // Design matrix over bin centers in the rescaled basis.
  const std::size_t m = static_cast<std::size_t>(opts.poly_degree) + 1;
  std::vector<std::vector<double>> x(static_cast<std::size_t>(bins));
  for (int j = 0; j < bins; ++j) {
    const double center = lo + (static_cast<double>(j) + 0.5) * width;
    poly_features(rescale(center, lo, hi), opts.poly_degree, x[static_cast<std::size_t>(j)]);
  }

  // Damped Newton on the penalized Poisson objective, started from the
  // intercept matching the mean bin count.
  std::vector<double> beta(m, 0.0);
  double mean_count = 0.0;
  for (double c : counts) mean_count += c;
  mean_count /= static_cast<double>(bins);
  beta[0] = std::log(std::max(mean_count, 1e-12));

  double current = objective(x, counts, beta, opts.ridge);
  std::vector<double> grad(m), mu_j(static_cast<std::size_t>(bins));
  bool converged = false;
  double grad_norm = 0.0;
  for (int it = 0; it < opts.max_newton_iter; ++it) {
    // Gradient: X^T(mu - N) + ridge*beta; Hessian: X^T diag(mu) X + ridge*I.
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<std::vector<double>> hess(m, std::vector<double>(m, 0.0));
    for (int j = 0; j < bins; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      double eta = 0.0;
      for (std::size_t k = 0; k < m; ++k) eta += x[ju][k] * beta[k];
      eta = std::min(eta, 700.0);  // exp overflow guard
      mu_j[ju] = std::exp(eta);
      const double resid = mu_j[ju] - counts[ju];
      for (std::size_t k = 0; k < m; ++k) {
        grad[k] += x[ju][k] * resid;
        for (std::size_t l = 0; l <= k; ++l) hess[k][l] += x[ju][k] * x[ju][l] * mu_j[ju];
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      grad[k] += opts.ridge * beta[k];
      hess[k][k] += opts.ridge;
      for (std::size_t l = k + 1; l < m; ++l) hess[k][l] = hess[l][k];
    }
    grad_norm = 0.0;
    for (double gg : grad) grad_norm += gg * gg;
    grad_norm = std::sqrt(grad_norm);
    if (grad_norm <= opts.grad_tol) {
      converged = true;
      break;
    }
    std::vector<double> step = solve_spd(hess, grad);
    // Halve until the objective decreases.
    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      std::vector<double> trial(m);
      for (std::size_t k = 0; k < m; ++k) trial[k] = beta[k] - t * step[k];
      const double value = objective(x, counts, trial, opts.ridge);
      if (value < current) {
        beta = std::move(trial);
        current = value;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Line search stalled at numerical precision; accept a near-stationary
      // point, otherwise report failure below.
      converged = grad_norm <= 1e-5;
      break;
    }
  }
  if (!converged && grad_norm > 1e-5) {
    throw NumericError("lfdr fit: Newton did not converge", grad_norm);
  }

  LfdrModel model;
  model.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int j = 0; j <= bins; ++j) {
    model.bin_edges[static_cast<std::size_t>(j)] = lo + static_cast<double>(j) * width;
  }
  model.beta = std::move(beta);
  model.pi0 = opts.pi0;
  model.ridge = opts.ridge;
  model.z_lo = lo;
  model.z_hi = hi;
  // exp(x^T beta) estimates the expected count per bin; dividing by n*width
  // turns it into a density comparable with f0.
  model.count_to_density = static_cast<double>(z.size()) * width;
  return model;
}

double density(const LfdrModel& model, double z) {
  if (!model.fitted()) throw NumericError("lfdr density: model not fitted");
  const int degree = static_cast<int>(model.beta.size()) - 1;
  std::vector<double> feats;
  poly_features(rescale(z, model.z_lo, model.z_hi), degree, feats);
  double eta = 0.0;
  for (std::size_t k = 0; k < model.beta.size(); ++k) eta += feats[k] * model.beta[k];
  eta = std::min(eta, 700.0);
  return std::exp(eta) / model.count_to_density;
}

double evaluate(const LfdrModel& model, double z) {
  const double f_hat = density(model, z);
  if (f_hat <= 0.0) return 1.0;
  const double value = model.pi0 * null_pdf(z) / f_hat;
  return std::clamp(value, 0.0, 1.0);
}

std::vector<std::size_t> select(const LfdrModel& model, std::span<const double> z,
                                double tau) {
  if (tau <= 0.0 || tau >= 1.0) throw ConfigError("lfdr select: tau outside (0, 1)");
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (evaluate(model, z[i]) <= tau) picked.push_back(i);
  }
  return picked;
}

std::string serialize(const LfdrModel& model) {
  std::ostringstream out;
  auto num = [&](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "lfdr_model v1\n";
  out << "pi0\t" << num(model.pi0) << "\n";
  out << "ridge\t" << num(model.ridge) << "\n";
  out << "count_to_density\t" << num(model.count_to_density) << "\n";
  out << "z_lo\t" << num(model.z_lo) << "\n";
  out << "z_hi\t" << num(model.z_hi) << "\n";
  out << "bin_edges";
  for (double e : model.bin_edges) out << "\t" << num(e);
  out << "\nbeta";
  for (double b : model.beta) out << "\t" << num(b);
  out << "\n";
  return out.str();
}

LfdrModel deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "lfdr_model v1") {
    throw DataError("lfdr model file: bad header");
  }
  LfdrModel model;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    std::getline(ls, key, '\t');
    if (key == "pi0") ls >> model.pi0;
    else if (key == "ridge") ls >> model.ridge;
    else if (key == "count_to_density") ls >> model.count_to_density;
    else if (key == "z_lo") ls >> model.z_lo;
    else if (key == "z_hi") ls >> model.z_hi;
    else if (key == "bin_edges" || key == "beta") {
      std::vector<double>& target = key == "beta" ? model.beta : model.bin_edges;
      double v;
      while (ls >> v) target.push_back(v);
    } else {
      throw DataError("lfdr model file: unknown key '" + key + "'");
    }
  }
  if (!model.fitted()) throw DataError("lfdr model file: missing beta");
  return model;
}

}  // namespace subdyve::lfdr
