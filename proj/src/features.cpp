#include "subdyve/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subdyve/errors.hpp"
#include "subdyve/kernels.hpp"

namespace subdyve::features {

namespace {

// Subtracts projections onto rows [0, row) of q; returns the remaining norm.
double orthogonalize_row(Matrix& q, std::size_t row) {
  const std::size_t dim = q.cols;
  for (std::size_t r = 0; r < row; ++r) {
    const double proj = kernels::dot(q.row(row), q.row(r), dim);
    kernels::axpy(-proj, q.row(r), q.row(row), dim);
  }
  return std::sqrt(kernels::l2_sq(q.row(row), dim));
}

// Replaces a dead direction with the coordinate axis least explained by the
// earlier rows, orthonormalized.
void fill_with_complement_axis(Matrix& q, std::size_t row) {
  const std::size_t dim = q.cols;
  std::size_t best_axis = 0;
  double best_norm = -1.0;
  std::vector<double> scratch(dim);
  for (std::size_t axis = 0; axis < dim; ++axis) {
    std::fill(scratch.begin(), scratch.end(), 0.0);
    scratch[axis] = 1.0;
    for (std::size_t r = 0; r < row; ++r) {
      const double proj = kernels::dot(scratch.data(), q.row(r), dim);
      kernels::axpy(-proj, q.row(r), scratch.data(), dim);
    }
    const double norm = std::sqrt(kernels::l2_sq(scratch.data(), dim));
    if (norm > best_norm) {
      best_norm = norm;
      best_axis = axis;
    }
  }
  std::fill(q.row(row), q.row(row) + dim, 0.0);
  q(row, best_axis) = 1.0;
  const double norm = orthogonalize_row(q, row);
  for (std::size_t t = 0; t < dim; ++t) q.row(row)[t] /= norm;
}

// Cyclic Jacobi eigendecomposition for the small k x k Rayleigh-Ritz problem.
void jacobi_small(std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& v) {
  const std::size_t m = a.size();
  v.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t r = p + 1; r < m; ++r) off += a[p][r] * a[p][r];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t r = p + 1; r < m; ++r) {
        if (std::fabs(a[p][r]) < 1e-300) continue;
        const double theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a[k][p], akr = a[k][r];
          a[k][p] = c * akp - s * akr;
          a[k][r] = s * akp + c * akr;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a[p][k], ark = a[r][k];
          a[p][k] = c * apk - s * ark;
          a[r][k] = s * apk + c * ark;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = v[k][p], vkr = v[k][r];
          v[k][p] = c * vkp - s * vkr;
          v[k][r] = s * vkp + c * vkr;
        }
      }
    }
  }
}

}  // namespace

PcaResult pca_project(const std::vector<mining::Fingerprint>& fps, std::size_t k,
                      int max_iter, double tol) {
  const std::size_t n = fps.size();
  if (n < 2) throw DataError("pca_project: need at least 2 samples");
  const std::size_t d = fps[0].size();
  if (k > d) throw ConfigError("pca_project: k exceeds the fingerprint dimension");

  // Centered data matrix.
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    if (fps[i].size() != d) throw DataError("pca_project: ragged fingerprints");
    for (std::size_t t = 0; t < d; ++t) x(i, t) = static_cast<double>(fps[i].values[t]);
  }
  for (std::size_t t = 0; t < d; ++t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, t);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x(i, t) -= mean;
  }

  const double total_var = kernels::l2_sq(x.data.data(), x.size()) / static_cast<double>(n);
  PcaResult result;
  if (total_var <= 1e-300) {
    result.projected = Matrix(n, k);
    result.variances.assign(k, 0.0);
    result.zero_variance = true;
    return result;
  }

  // Components as rows of q (k x d). Deterministic start: coordinate axes of
  // the k highest-variance columns.
  std::vector<double> col_var(d, 0.0);
  for (std::size_t t = 0; t < d; ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x(i, t) * x(i, t);
    col_var[t] = s;
  }
  std::vector<std::size_t> col_order(d);
  std::iota(col_order.begin(), col_order.end(), 0);
  std::stable_sort(col_order.begin(), col_order.end(),
                   [&](std::size_t a, std::size_t b) { return col_var[a] > col_var[b]; });
  Matrix q(k, d);
  for (std::size_t c = 0; c < k; ++c) q(c, col_order[c]) = 1.0;

  // Orthogonal (blocked power) iteration: q <- orth(C q) with
  // C v = X^T (X v) / n. Dead directions (rank-deficient data) are refilled
  // with orthonormal complement axes, which carry ~zero variance.
  auto apply_cov = [&](Matrix& block) {
    std::vector<double> xv(n), cv(d);
    for (std::size_t c = 0; c < block.rows; ++c) {
      for (std::size_t i = 0; i < n; ++i) xv[i] = kernels::dot(x.row(i), block.row(c), d);
      std::fill(cv.begin(), cv.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) kernels::axpy(xv[i], x.row(i), cv.data(), d);
      for (std::size_t t = 0; t < d; ++t) block(c, t) = cv[t] / static_cast<double>(n);
    }
  };

  Matrix prev = q;
  for (int it = 0; it < max_iter; ++it) {
    Matrix y = q;
    apply_cov(y);
    for (std::size_t c = 0; c < k; ++c) {
      const double pre = std::sqrt(kernels::l2_sq(y.row(c), d));
      const double norm = orthogonalize_row(y, c);
      if (norm > 1e-12 * std::max(pre, 1e-30) && norm > 1e-300) {
        for (std::size_t t = 0; t < d; ++t) y.row(c)[t] /= norm;
      } else {
        fill_with_complement_axis(y, c);
      }
    }
    q = std::move(y);
    double drift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double cosv = std::fabs(kernels::dot(q.row(c), prev.row(c), d));
      drift = std::max(drift, 1.0 - cosv);
    }
    prev = q;
    if (drift < tol && it > 0) break;
  }

  // Rayleigh-Ritz rotation inside the captured subspace: diagonalize
  // B = q C q^T (k x k) and rotate q so components are eigen-directions even
  // when eigenvalues tie or cluster.
  {
    Matrix cq = q;
    apply_cov(cq);
    std::vector<std::vector<double>> b(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t c = 0; c < k; ++c) b[a][c] = kernels::dot(q.row(a), cq.row(c), d);
    // Symmetrize against rounding.
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t c = a + 1; c < k; ++c) {
        const double m = 0.5 * (b[a][c] + b[c][a]);
        b[a][c] = b[c][a] = m;
      }
    std::vector<std::vector<double>> v;
    jacobi_small(b, v);
    // Order by Ritz value descending.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return b[a][a] > b[c][c]; });
    Matrix rotated(k, d);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t a = 0; a < k; ++a) {
        kernels::axpy(v[a][order[c]], q.row(a), rotated.row(c), d);
      }
    }
    q = std::move(rotated);
  }

  // Project and measure explained variances along each component.
  result.projected = Matrix(n, k);
  result.variances.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      result.projected(i, c) = kernels::dot(x.row(i), q.row(c), d);
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += result.projected(i, c) * result.projected(i, c);
    result.variances[c] = s / static_cast<double>(n);
  }
  return result;
}

std::vector<double> rbf_seed_similarity(const Matrix& projected,
                                        const std::vector<int>& seed_idx, double gamma) {
  if (seed_idx.empty()) throw DataError("rbf_seed_similarity: empty seed set");
  const std::size_t n = projected.rows;
  const std::size_t k = projected.cols;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0.0;
    for (int j : seed_idx) {
      double dist_sq = 0.0;
      const double* a = projected.row(i);
      const double* b = projected.row(static_cast<std::size_t>(j));
      for (std::size_t t = 0; t < k; ++t) {
        const double dlt = a[t] - b[t];
        dist_sq += dlt * dlt;
      }
      best = std::max(best, std::exp(-gamma * dist_sq));
    }
    out[i] = best;
  }
  return out;
}

double median_heuristic_gamma(const Matrix& projected, const std::vector<int>& seed_idx) {
  std::vector<double> dists;
  for (std::size_t a = 0; a < seed_idx.size(); ++a) {
    for (std::size_t b = a + 1; b < seed_idx.size(); ++b) {
      double dist_sq = 0.0;
      const double* pa = projected.row(static_cast<std::size_t>(seed_idx[a]));
      const double* pb = projected.row(static_cast<std::size_t>(seed_idx[b]));
      for (std::size_t t = 0; t < projected.cols; ++t) {
        const double dlt = pa[t] - pb[t];
        dist_sq += dlt * dlt;
      }
      dists.push_back(std::sqrt(dist_sq));
    }
  }
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                   dists.end());
  const double median = dists[dists.size() / 2];
  if (median <= 1e-12) return 1.0;
  return 1.0 / (2.0 * median * median);
}

std::vector<double> rank_scores(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>((i + 1) + (j + 1));
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> hybrid_rank(const std::vector<double>& np_scores,
                                const std::vector<double>& pca_sims) {
  if (np_scores.size() != pca_sims.size()) {
    throw DataError("hybrid_rank: input lengths differ");
  }
  const auto np_rank = rank_scores(np_scores);
  const auto pca_rank = rank_scores(pca_sims);
  std::vector<double> h(np_scores.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = 0.5 * (np_rank[i] + pca_rank[i]);
  return h;
}

FeatureMatrix assemble(const std::vector<double>& weights,
                       const std::vector<double>& np_scores,
                       const std::vector<mining::Fingerprint>& fps,
                       const std::vector<double>& pca_sims,
                       const std::vector<double>& hybrid,
                       const std::vector<std::string>& node_ids,
                       const std::optional<ExternalTable>& external) {
  const std::size_t n = weights.size();
  if (np_scores.size() != n || fps.size() != n || pca_sims.size() != n ||
      hybrid.size() != n || node_ids.size() != n) {
    throw DataError("assemble: feature blocks disagree on the node count");
  }
  const std::size_t d = n == 0 ? 0 : fps[0].size();
  const std::size_t e = external ? external->width : 0;
  if (external) {
    for (const auto& [id, row] : external->rows) {
      if (row.size() != e) {
        throw DataError("assemble: external row '" + id + "' has width " +
                        std::to_string(row.size()) + ", expected " + std::to_string(e));
      }
    }
  }

  FeatureMatrix fm;
  fm.fingerprint_dim = d;
  fm.external_dim = e;
  fm.rows = Matrix(n, 2 + d + 2 + e);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = fm.rows.row(i);
    row[FeatureMatrix::kWeightCol] = weights[i];
    row[FeatureMatrix::kNpCol] = np_scores[i];
    // L2-normalized fingerprint block; raw counts would swamp the unit-scale
    // features.
    double norm_sq = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double v = static_cast<double>(fps[i].values[t]);
      norm_sq += v * v;
    }
    const double inv = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      row[2 + t] = static_cast<double>(fps[i].values[t]) * inv;
    }
    row[2 + d] = pca_sims[i];
    row[2 + d + 1] = hybrid[i];
    if (external) {
      auto it = external->rows.find(node_ids[i]);
      if (it == external->rows.end()) {
        fm.missing_external_rows++;  // zeros already in place
      } else {
        for (std::size_t t = 0; t < e; ++t) row[2 + d + 2 + t] = it->second[t];
      }
    }
  }
  return fm;
}

}  // namespace subdyve::features
