#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subdyve/dense.hpp"
#include "subdyve/mining.hpp"
#include "subdyve/simnet.hpp"

namespace subdyve::gnn {

// Symmetrically normalized aggregation operator
// A_hat = D^-1/2 (A_w + I) D^-1/2 over the weighted similarity graph, CSR.
struct GcnAdjacency {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;

  // out = A_hat * m (dense block), row-parallel safe.
  Matrix multiply(const Matrix& m) const;
};

GcnAdjacency build_gcn_adjacency(const simnet::SimilarityGraph& g);

// Two GCN layers (in -> 64 -> 32) with ReLU, per-node LayerNorm, a projected
// residual on layer 1, and a scalar head on the 32-dim embeddings.
struct GcnParams {
  Matrix w1;                  // in x hidden
  std::vector<double> b1;     // hidden
  Matrix res1;                // in x hidden (projected residual)
  std::vector<double> norm1_scale, norm1_shift;
  Matrix w2;                  // hidden x embed
  std::vector<double> b2;     // embed
  std::vector<double> norm2_scale, norm2_shift;
  std::vector<double> head_w;  // embed
  double head_b = 0.0;

  std::size_t input_dim() const { return w1.rows; }
  std::size_t hidden_dim() const { return w1.cols; }
  std::size_t embed_dim() const { return w2.cols; }

  // Named views over every tensor, for the optimizer and gradient checks.
  std::vector<std::pair<std::string, std::span<double>>> tensors();
};

GcnParams init_params(std::size_t input_dim, std::uint64_t rng_seed,
                      std::size_t hidden = 64, std::size_t embed = 32);

struct LossWeights {
  double lambda_rank = 0.3;
  double lambda_contrast = 0.6;
  double margin = 0.5;
  double gamma_np = 5.0;
  double tau = 0.5;
  double learning_rate = 8e-4;
  double weight_decay = 1.57e-5;
  int epochs = 50;
};

struct ForwardResult {
  std::vector<double> logits;
  Matrix embeddings;
};

ForwardResult forward(const GcnParams& params, const Matrix& features,
                      const GcnAdjacency& adj);

struct LossBreakdown {
  double total = 0.0;
  double bce = 0.0;
  double rank = 0.0;
  double contrast = 0.0;
  bool contrast_degenerate = false;  // |S2| < 2
};

// Composite loss: (1-lr)*BCE + lr*RankNet + lc*InfoNCE.
//  - BCE: node weight w_i = 1 + gamma_np * np_i, class weight PW on the
//    negative term, PW = #neg / (#pos + 1e-8).
//  - RankNet: mean hinge max(0, m - (l_i - l_j)) over i in S2, j outside.
//  - InfoNCE over S2 embeddings; each anchor's positive is its most
//    fingerprint-similar other member, the rest of S2 are negatives.
LossBreakdown loss_total(const std::vector<double>& logits, const Matrix& embeddings,
                         const std::vector<std::uint8_t>& labels,
                         const std::vector<double>& np_scores, const LossWeights& lw,
                         const std::vector<mining::Fingerprint>& fps);

// Loss plus exact reverse-mode gradients for every parameter tensor.
struct BackwardResult {
  LossBreakdown loss;
  GcnParams grads;  // same shapes as the parameters
};

BackwardResult backward(const GcnParams& params, const Matrix& features,
                        const GcnAdjacency& adj, const std::vector<std::uint8_t>& labels,
                        const std::vector<double>& np_scores, const LossWeights& lw,
                        const std::vector<mining::Fingerprint>& fps);

struct TrainResult {
  std::vector<double> logits;
  Matrix embeddings;
  std::vector<double> loss_trace;  // one total per epoch, pre-update
};

// Full-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8); weight decay enters the
// gradient. Deterministic; throws NumericError on non-finite loss.
TrainResult train(GcnParams& params, const Matrix& features, const GcnAdjacency& adj,
                  const std::vector<std::uint8_t>& labels,
                  const std::vector<double>& np_scores, const LossWeights& lw,
                  const std::vector<mining::Fingerprint>& fps);

// Parameter checkpoint: versioned header with tensor names and shapes, then
// row-major float64 payloads.
void save_checkpoint(const GcnParams& params, const std::string& path);
GcnParams load_checkpoint(const std::string& path);

}  // namespace subdyve::gnn
