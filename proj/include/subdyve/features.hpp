#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subdyve/dense.hpp"
#include "subdyve/mining.hpp"

namespace subdyve::features {

// GNN input rows, one per node, laid out as
// [w (1), np_score (1), fingerprint (d, L2-normalized), pca_sim (1),
//  hybrid_rank (1), external embedding (e, optional)].
struct FeatureMatrix {
  Matrix rows;
  std::size_t fingerprint_dim = 0;
  std::size_t external_dim = 0;
  std::size_t missing_external_rows = 0;

  static constexpr std::size_t kWeightCol = 0;
  static constexpr std::size_t kNpCol = 1;

  void set_weight(std::size_t node, double w) { rows(node, kWeightCol) = w; }
  void set_np_score(std::size_t node, double s) { rows(node, kNpCol) = s; }
};

struct PcaResult {
  Matrix projected;                  // n x k scores
  std::vector<double> variances;    // explained variances, non-increasing
  bool zero_variance = false;
};

// Top-k principal components by blocked power iteration on the covariance
// operator (population convention, n divisor), with per-iteration
// orthogonalization. Data is mean-centered first.
PcaResult pca_project(const std::vector<mining::Fingerprint>& fps, std::size_t k,
                      int max_iter = 500, double tol = 1e-12);

// s_i = max over seeds j of exp(-gamma * |z_i - z_j|^2).
std::vector<double> rbf_seed_similarity(const Matrix& projected,
                                        const std::vector<int>& seed_idx, double gamma);

// Median heuristic: gamma = 1 / (2 * median^2) over pairwise projected seed
// distances; falls back to 1 when the median vanishes.
double median_heuristic_gamma(const Matrix& projected, const std::vector<int>& seed_idx);

// Midrank positions, rank 1 = largest value; ties get the mean of their span.
std::vector<double> rank_scores(const std::vector<double>& values);

// h_i = (rank(pca_sim_i) + rank(np_score_i)) / 2.
std::vector<double> hybrid_rank(const std::vector<double>& np_scores,
                                const std::vector<double>& pca_sims);

// External embedding table keyed by compound id; all rows share one width.
struct ExternalTable {
  std::size_t width = 0;
  std::map<std::string, std::vector<double>> rows;
};

FeatureMatrix assemble(const std::vector<double>& weights,
                       const std::vector<double>& np_scores,
                       const std::vector<mining::Fingerprint>& fps,
                       const std::vector<double>& pca_sims,
                       const std::vector<double>& hybrid,
                       const std::vector<std::string>& node_ids,
                       const std::optional<ExternalTable>& external = std::nullopt);

}  // namespace subdyve::features
