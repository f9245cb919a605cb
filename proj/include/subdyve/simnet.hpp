#pragma once

#include <string>
#include <vector>

#include "subdyve/mining.hpp"

namespace subdyve::simnet {

// Sparse undirected compound similarity graph; weights are cosine
// similarities in (0, 1].
struct SimilarityGraph {
  struct Edge {
    int i, j;
    double w;
  };
  std::vector<std::string> node_ids;
  std::vector<Edge> edges;  // stored with i < j, sorted by (i, j)

  std::size_t size() const { return node_ids.size(); }
};

// Column-stochastic view: W[i][j] = w(i,j) / colsum(j), stored CSR by row so
// mat-vec products parallelize over rows. Isolated nodes keep zero columns.
struct NormalizedAdjacency {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;

  // y = W * x
  void multiply(const std::vector<double>& x, std::vector<double>& y,
                unsigned threads = 1) const;
};

// Cosine similarity of two count vectors; 0 when either is all-zero.
// Throws DataError on length mismatch.
double cosine(const mining::Fingerprint& a, const mining::Fingerprint& b);

// Union-of-kNN sparsification over all-pairs cosine similarity, computed
// blockwise. Ties break toward (higher similarity, lower node index).
SimilarityGraph build_graph(const std::vector<mining::Fingerprint>& fps,
                            const std::vector<std::string>& ids, int k,
                            double sim_min, unsigned threads = 1);

NormalizedAdjacency column_normalize(const SimilarityGraph& g);

}  // namespace subdyve::simnet
