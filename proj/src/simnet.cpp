#include "subdyve/simnet.hpp"

#include <algorithm>
#include <cmath>

#include "subdyve/errors.hpp"
#include "subdyve/kernels.hpp"
#include "subdyve/parallel.hpp"

namespace subdyve::simnet {

void NormalizedAdjacency::multiply(const std::vector<double>& x, std::vector<double>& y,
                                   unsigned threads) const {
  y.assign(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    double acc = 0.0;
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      acc += values[static_cast<std::size_t>(p)] *
             x[static_cast<std::size_t>(col_idx[static_cast<std::size_t>(p)])];
    }
    y[i] = acc;
  });
}

double cosine(const mining::Fingerprint& a, const mining::Fingerprint& b) {
  if (a.size() != b.size()) {
    throw DataError("cosine: fingerprint lengths differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a.values[i]);
    const double y = static_cast<double>(b.values[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, 0.0, 1.0);
}

SimilarityGraph build_graph(const std::vector<mining::Fingerprint>& fps,
                            const std::vector<std::string>& ids, int k,
                            double sim_min, unsigned threads) {
  if (fps.size() != ids.size()) throw DataError("build_graph: ids/fingerprints mismatch");
  if (k < 1 && sim_min <= 0.0) {
    throw ConfigError("build_graph: need k >= 1 or sim_min > 0");
  }
  const std::size_t n = fps.size();
  const std::size_t dim = n == 0 ? 0 : fps[0].size();

  // Raw count rows as doubles: integer-valued, so dot products are exact in
  // any accumulation order and the vector backend changes nothing.
  std::vector<double> rows(n * dim, 0.0);
  std::vector<double> norm(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (fps[i].size() != dim) throw DataError("build_graph: ragged fingerprint matrix");
    for (std::size_t t = 0; t < dim; ++t) {
      rows[i * dim + t] = static_cast<double>(fps[i].values[t]);
    }
    norm[i] = std::sqrt(kernels::l2_sq(&rows[i * dim], dim));
  }

  // Per-node kNN lists, computed independently per node.
  std::vector<std::vector<std::pair<double, int>>> kept(n);
  const std::size_t keep_k = k < 1 ? n : static_cast<std::size_t>(k);
  parallel_for(n, threads, [&](std::size_t i) {
    if (norm[i] == 0.0) return;
    std::vector<std::pair<double, int>> cands;
    cands.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || norm[j] == 0.0) continue;
      double s = kernels::dot(&rows[i * dim], &rows[j * dim], dim) / (norm[i] * norm[j]);
      s = std::clamp(s, 0.0, 1.0);
      if (s > 0.0 && s >= sim_min) cands.push_back({s, static_cast<int>(j)});
    }
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    if (cands.size() > keep_k) cands.resize(keep_k);
    kept[i] = std::move(cands);
  });

  // Symmetrize by union; recorded with i < j.
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [s, j] : kept[i]) {
      const auto a = std::min<std::size_t>(i, static_cast<std::size_t>(j));
      const auto b = std::max<std::size_t>(i, static_cast<std::size_t>(j));
      adj[a].push_back({static_cast<int>(b), s});
    }
  }
  SimilarityGraph g;
  g.node_ids = ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    int last = -1;
    for (const auto& [j, s] : adj[i]) {
      if (j == last) continue;  // union of the two directions
      last = j;
      g.edges.push_back({static_cast<int>(i), j, s});
    }
  }
  return g;
}

NormalizedAdjacency column_normalize(const SimilarityGraph& g) {
  const int n = static_cast<int>(g.size());
  std::vector<double> col_sum(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : g.edges) {
    col_sum[static_cast<std::size_t>(e.i)] += e.w;
    col_sum[static_cast<std::size_t>(e.j)] += e.w;
  }
  // Row i collects W[i][j] = w(i,j)/colsum(j) over neighbors j.
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
  for (const auto& e : g.edges) {
    if (col_sum[static_cast<std::size_t>(e.j)] > 0.0) {
      rows[static_cast<std::size_t>(e.i)].push_back(
          {e.j, e.w / col_sum[static_cast<std::size_t>(e.j)]});
    }
    if (col_sum[static_cast<std::size_t>(e.i)] > 0.0) {
      rows[static_cast<std::size_t>(e.j)].push_back(
          {e.i, e.w / col_sum[static_cast<std::size_t>(e.i)]});
    }
  }
  NormalizedAdjacency wn;
  wn.n = n;
  wn.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    std::sort(r.begin(), r.end());
    wn.row_ptr[static_cast<std::size_t>(i) + 1] =
        wn.row_ptr[static_cast<std::size_t>(i)] + static_cast<int>(r.size());
    for (const auto& [j, v] : r) {
      wn.col_idx.push_back(j);
      wn.values.push_back(v);
    }
  }
  return wn;
}

}  // namespace subdyve::simnet
