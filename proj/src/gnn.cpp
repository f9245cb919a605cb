#include "subdyve/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "subdyve/errors.hpp"
#include "subdyve/kernels.hpp"
#include "subdyve/rng.hpp"

namespace subdyve::gnn {

namespace {

constexpr double kLnEps = 1e-5;   // LayerNorm variance epsilon
constexpr double kPwEps = 1e-8;   // pos_weight denominator epsilon

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct LayerNormCache {
  Matrix xhat;                 // normalized pre-affine values
  std::vector<double> invstd;  // per row
};

Matrix layer_norm(const Matrix& x, const std::vector<double>& scale,
                  const std::vector<double>& shift, LayerNormCache& cache) {
  const std::size_t n = x.rows, d = x.cols;
  Matrix y(n, d);
  cache.xhat = Matrix(n, d);
  cache.invstd.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t t = 0; t < d; ++t) mean += x(i, t);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double c = x(i, t) - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    cache.invstd[i] = inv;
    for (std::size_t t = 0; t < d; ++t) {
      const double xf = (x(i, t) - mean) * inv;
      cache.xhat(i, t) = xf;
      y(i, t) = scale[t] * xf + shift[t];
    }
  }
  return y;
}

// dy -> dx, accumulating scale/shift gradients.
Matrix layer_norm_backward(const Matrix& dy, const LayerNormCache& cache,
                           const std::vector<double>& scale,
                           std::vector<double>& d_scale, std::vector<double>& d_shift) {
  const std::size_t n = dy.rows, d = dy.cols;
  Matrix dx(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double sum_dxhat = 0.0;
    double sum_dxhat_xhat = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double g = dy(i, t);
      d_scale[t] += g * cache.xhat(i, t);
      d_shift[t] += g;
      const double dxhat = g * scale[t];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * cache.xhat(i, t);
    }
    const double inv = cache.invstd[i];
    const double dn = static_cast<double>(d);
    for (std::size_t t = 0; t < d; ++t) {
      const double dxhat = dy(i, t) * scale[t];
      dx(i, t) = (inv / dn) * (dn * dxhat - sum_dxhat - cache.xhat(i, t) * sum_dxhat_xhat);
    }
  }
  return dx;
}

Matrix add_bias(Matrix m, const std::vector<double>& b) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t t = 0; t < m.cols; ++t) m(i, t) += b[t];
  }
  return m;
}

Matrix relu(const Matrix& m) {
  Matrix r = m;
  for (double& v : r.data) v = v > 0.0 ? v : 0.0;
  return r;
}

struct ForwardCache {
  Matrix xw1, a1, n1, h1;  // layer 1 intermediates (a1 pre-ReLU)
  Matrix xw2, a2;          // layer 2 intermediates
  LayerNormCache ln1, ln2;
  Matrix z;                // embeddings
  std::vector<double> logits;
};

ForwardCache forward_cached(const GcnParams& p, const Matrix& x, const GcnAdjacency& adj) {
  if (x.cols != p.input_dim()) {
    throw DataError("gnn forward: feature width " + std::to_string(x.cols) +
                    " != layer-1 input " + std::to_string(p.input_dim()));
  }
  if (static_cast<int>(x.rows) != adj.n) {
    throw DataError("gnn forward: node count mismatch between features and graph");
  }
  ForwardCache c;
  c.xw1 = add_bias(matmul(x, p.w1), p.b1);
  c.a1 = adj.multiply(c.xw1);
  Matrix r1 = relu(c.a1);
  c.n1 = layer_norm(r1, p.norm1_scale, p.norm1_shift, c.ln1);
  Matrix xres = matmul(x, p.res1);
  c.h1 = c.n1;
  for (std::size_t i = 0; i < c.h1.size(); ++i) c.h1.data[i] += xres.data[i];

  c.xw2 = add_bias(matmul(c.h1, p.w2), p.b2);
  c.a2 = adj.multiply(c.xw2);
  Matrix r2 = relu(c.a2);
  c.z = layer_norm(r2, p.norm2_scale, p.norm2_shift, c.ln2);

  c.logits.assign(x.rows, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    c.logits[i] = kernels::dot(c.z.row(i), p.head_w.data(), p.embed_dim()) + p.head_b;
  }
  return c;
}

// Most fingerprint-similar other member of S2 for each anchor (ties toward
// the smaller index). Pairing carries no gradient.
std::vector<int> contrastive_positives(const std::vector<std::size_t>& s2,
                                       const std::vector<mining::Fingerprint>& fps) {
  std::vector<int> pos(s2.size(), -1);
  for (std::size_t a = 0; a < s2.size(); ++a) {
    double best = -2.0;
    int best_j = -1;
    for (std::size_t b = 0; b < s2.size(); ++b) {
      if (a == b) continue;
      const double s = simnet::cosine(fps[s2[a]], fps[s2[b]]);
      if (s > best) {
        best = s;
        best_j = static_cast<int>(b);
      }
    }
    pos[a] = best_j;
  }
  return pos;
}

struct LossGrads {
  LossBreakdown loss;
  std::vector<double> d_logits;  // includes the (1-lr)/lr weighting
  Matrix d_z;                    // contrastive part, lambda_contrast applied
};

LossGrads loss_with_grads(const std::vector<double>& logits, const Matrix& z,
                          const std::vector<std::uint8_t>& labels,
                          const std::vector<double>& np_scores, const LossWeights& lw,
                          const std::vector<mining::Fingerprint>& fps,
                          bool want_grads) {
  const std::size_t n = logits.size();
  if (labels.size() != n || np_scores.size() != n) {
    throw DataError("gnn loss: labels/np_scores length mismatch");
  }
  std::vector<std::size_t> s2;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i]) {
      s2.push_back(i);
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("gnn loss: need at least one positive and one negative node");
  }

  LossGrads out;
  out.d_logits.assign(n, 0.0);
  out.d_z = Matrix(z.rows, z.cols);

  // Weighted, class-balanced BCE.
  const double pw = static_cast<double>(n_neg) / (static_cast<double>(n_pos) + kPwEps);
  double bce = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 + lw.gamma_np * np_scores[i];
    const double l = logits[i];
    if (labels[i]) {
      bce += w * softplus(-l);
    } else {
      bce += w * pw * softplus(l);
    }
    if (want_grads) {
      const double g = labels[i] ? w * (sigmoid(l) - 1.0) : w * pw * sigmoid(l);
      out.d_logits[i] += (1.0 - lw.lambda_rank) * g / static_cast<double>(n);
    }
  }
  bce /= static_cast<double>(n);

  // Pairwise hinge over (S2, complement).
  double rank = 0.0;
  const double pairs = static_cast<double>(n_pos) * static_cast<double>(n_neg);
  for (std::size_t i : s2) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j]) continue;
      const double arg = lw.margin - (logits[i] - logits[j]);
      if (arg > 0.0) {
        rank += arg;
        if (want_grads) {
          out.d_logits[i] -= lw.lambda_rank / pairs;
          out.d_logits[j] += lw.lambda_rank / pairs;
        }
      }
    }
  }
  rank /= pairs;

  // InfoNCE over S2 embeddings.
  double contrast = 0.0;
  bool degenerate = false;
  if (s2.size() < 2) {
    degenerate = true;
  } else {
    if (fps.size() != n) throw DataError("gnn loss: fingerprint table size mismatch");
    const auto positives = contrastive_positives(s2, fps);
    const double inv_s2 = 1.0 / static_cast<double>(s2.size());
    const std::size_t e = z.cols;
    for (std::size_t a = 0; a < s2.size(); ++a) {
      const std::size_t anchor = s2[a];
      const int pos_b = positives[a];
      // Scores over every other member of S2; softmax target is the positive.
      std::vector<double> scores(s2.size(), -std::numeric_limits<double>::infinity());
      double max_score = -std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < s2.size(); ++b) {
        if (b == a) continue;
        scores[b] = kernels::dot(z.row(anchor), z.row(s2[b]), e) / lw.tau;
        max_score = std::max(max_score, scores[b]);
      }
      double denom = 0.0;
      for (std::size_t b = 0; b < s2.size(); ++b) {
        if (b == a) continue;
        denom += std::exp(scores[b] - max_score);
      }
      const double log_denom = std::log(denom) + max_score;
      contrast += inv_s2 * (log_denom - scores[static_cast<std::size_t>(pos_b)]);
      if (want_grads) {
        for (std::size_t b = 0; b < s2.size(); ++b) {
          if (b == a) continue;
          const double p = std::exp(scores[b] - log_denom);
          const double coeff = lw.lambda_contrast * inv_s2 *
                               (p - (static_cast<int>(b) == pos_b ? 1.0 : 0.0)) / lw.tau;
          kernels::axpy(coeff, z.row(s2[b]), out.d_z.row(anchor), e);
          kernels::axpy(coeff, z.row(anchor), out.d_z.row(s2[b]), e);
        }
      }
    }
  }

  out.loss.bce = bce;
  out.loss.rank = rank;
  out.loss.contrast = contrast;
  out.loss.contrast_degenerate = degenerate;
  out.loss.total = (1.0 - lw.lambda_rank) * bce + lw.lambda_rank * rank +
                   lw.lambda_contrast * contrast;
  return out;
}

GcnParams zero_like(const GcnParams& p) {
  GcnParams g;
  g.w1 = Matrix(p.w1.rows, p.w1.cols);
  g.b1.assign(p.b1.size(), 0.0);
  g.res1 = Matrix(p.res1.rows, p.res1.cols);
  g.norm1_scale.assign(p.norm1_scale.size(), 0.0);
  g.norm1_shift.assign(p.norm1_shift.size(), 0.0);
  g.w2 = Matrix(p.w2.rows, p.w2.cols);
  g.b2.assign(p.b2.size(), 0.0);
  g.norm2_scale.assign(p.norm2_scale.size(), 0.0);
  g.norm2_shift.assign(p.norm2_shift.size(), 0.0);
  g.head_w.assign(p.head_w.size(), 0.0);
  g.head_b = 0.0;
  return g;
}

}  // namespace

Matrix GcnAdjacency::multiply(const Matrix& m) const {
  Matrix out(static_cast<std::size_t>(n), m.cols);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    double* orow = out.row(i);
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      kernels::axpy(values[static_cast<std::size_t>(p)],
                    m.row(static_cast<std::size_t>(col_idx[static_cast<std::size_t>(p)])),
                    orow, m.cols);
    }
  }
  return out;
}

GcnAdjacency build_gcn_adjacency(const simnet::SimilarityGraph& g) {
  const int n = static_cast<int>(g.size());
  // Degree of A_w + I.
  std::vector<double> deg(static_cast<std::size_t>(n), 1.0);
  for (const auto& e : g.edges) {
    deg[static_cast<std::size_t>(e.i)] += e.w;
    deg[static_cast<std::size_t>(e.j)] += e.w;
  }
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)].push_back({i, 1.0 / deg[static_cast<std::size_t>(i)]});
  }
  for (const auto& e : g.edges) {
    const double v = e.w / std::sqrt(deg[static_cast<std::size_t>(e.i)] *
                                     deg[static_cast<std::size_t>(e.j)]);
    rows[static_cast<std::size_t>(e.i)].push_back({e.j, v});
    rows[static_cast<std::size_t>(e.j)].push_back({e.i, v});
  }
  GcnAdjacency adj;
  adj.n = n;
  adj.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    std::sort(r.begin(), r.end());
    adj.row_ptr[static_cast<std::size_t>(i) + 1] =
        adj.row_ptr[static_cast<std::size_t>(i)] + static_cast<int>(r.size());
    for (const auto& [j, v] : r) {
      adj.col_idx.push_back(j);
      adj.values.push_back(v);
    }
  }
  return adj;
}

std::vector<std::pair<std::string, std::span<double>>> GcnParams::tensors() {
  return {
      {"w1", std::span<double>(w1.data)},
      {"b1", std::span<double>(b1)},
      {"res1", std::span<double>(res1.data)},
      {"norm1_scale", std::span<double>(norm1_scale)},
      {"norm1_shift", std::span<double>(norm1_shift)},
      {"w2", std::span<double>(w2.data)},
      {"b2", std::span<double>(b2)},
      {"norm2_scale", std::span<double>(norm2_scale)},
      {"norm2_shift", std::span<double>(norm2_shift)},
      {"head_w", std::span<double>(head_w)},
      {"head_b", std::span<double>(&head_b, 1)},
  };
}

GcnParams init_params(std::size_t input_dim, std::uint64_t rng_seed, std::size_t hidden,
                      std::size_t embed) {
  Rng rng = derive_rng(rng_seed, {0x67636e69ULL});  // params stream
  auto glorot = [&](Matrix& m) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    for (double& v : m.data) v = rng.uniform(-limit, limit);
  };
  GcnParams p;
  p.w1 = Matrix(input_dim, hidden);
  glorot(p.w1);
  p.b1.assign(hidden, 0.0);
  p.res1 = Matrix(input_dim, hidden);
  glorot(p.res1);
  p.norm1_scale.assign(hidden, 1.0);
  p.norm1_shift.assign(hidden, 0.0);
  p.w2 = Matrix(hidden, embed);
  glorot(p.w2);
  p.b2.assign(embed, 0.0);
  p.norm2_scale.assign(embed, 1.0);
  p.norm2_shift.assign(embed, 0.0);
  p.head_w.assign(embed, 0.0);
  const double limit = std::sqrt(6.0 / static_cast<double>(embed + 1));
  for (double& v : p.head_w) v = rng.uniform(-limit, limit);
  p.head_b = 0.0;
  return p;
}

ForwardResult forward(const GcnParams& params, const Matrix& features,
                      const GcnAdjacency& adj) {
  ForwardCache c = forward_cached(params, features, adj);
  return ForwardResult{std::move(c.logits), std::move(c.z)};
}

LossBreakdown loss_total(const std::vector<double>& logits, const Matrix& embeddings,
                         const std::vector<std::uint8_t>& labels,
                         const std::vector<double>& np_scores, const LossWeights& lw,
                         const std::vector<mining::Fingerprint>& fps) {
  return loss_with_grads(logits, embeddings, labels, np_scores, lw, fps, false).loss;
}

BackwardResult backward(const GcnParams& p, const Matrix& x, const GcnAdjacency& adj,
                        const std::vector<std::uint8_t>& labels,
                        const std::vector<double>& np_scores, const LossWeights& lw,
                        const std::vector<mining::Fingerprint>& fps) {
  ForwardCache c = forward_cached(p, x, adj);
  LossGrads lg = loss_with_grads(c.logits, c.z, labels, np_scores, lw, fps, true);

  BackwardResult out;
  out.loss = lg.loss;
  out.grads = zero_like(p);
  const std::size_t n = x.rows;
  const std::size_t e = p.embed_dim();

  // Head: logits = Z head_w + head_b.
  Matrix dz = lg.d_z;  // contrastive part
  for (std::size_t i = 0; i < n; ++i) {
    const double g = lg.d_logits[i];
    out.grads.head_b += g;
    kernels::axpy(g, c.z.row(i), out.grads.head_w.data(), e);
    kernels::axpy(g, p.head_w.data(), dz.row(i), e);
  }

  // Layer 2: Z = LN(relu(A2)), A2 = adj * (H1 w2 + b2).
  Matrix dr2 = layer_norm_backward(dz, c.ln2, p.norm2_scale, out.grads.norm2_scale,
                                   out.grads.norm2_shift);
  for (std::size_t i = 0; i < dr2.size(); ++i) {
    if (c.a2.data[i] <= 0.0) dr2.data[i] = 0.0;
  }
  Matrix dxw2 = adj.multiply(dr2);  // adjacency is symmetric
  out.grads.w2 = matmul_tn(c.h1, dxw2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < e; ++t) out.grads.b2[t] += dxw2(i, t);
  }
  Matrix dh1 = matmul_nt(dxw2, p.w2);

  // Residual split: H1 = N1 + X res1.
  out.grads.res1 = matmul_tn(x, dh1);
  Matrix dr1 = layer_norm_backward(dh1, c.ln1, p.norm1_scale, out.grads.norm1_scale,
                                   out.grads.norm1_shift);
  for (std::size_t i = 0; i < dr1.size(); ++i) {
    if (c.a1.data[i] <= 0.0) dr1.data[i] = 0.0;
  }
  Matrix dxw1 = adj.multiply(dr1);
  out.grads.w1 = matmul_tn(x, dxw1);
  const std::size_t h = p.hidden_dim();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < h; ++t) out.grads.b1[t] += dxw1(i, t);
  }
  return out;
}

TrainResult train(GcnParams& params, const Matrix& features, const GcnAdjacency& adj,
                  const std::vector<std::uint8_t>& labels,
                  const std::vector<double>& np_scores, const LossWeights& lw,
                  const std::vector<mining::Fingerprint>& fps) {
  // Adam state per tensor entry.
  auto views = params.tensors();
  std::vector<std::vector<double>> m_state, v_state;
  for (auto& [name, span] : views) {
    (void)name;
    m_state.emplace_back(span.size(), 0.0);
    v_state.emplace_back(span.size(), 0.0);
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  TrainResult result;
  for (int epoch = 1; epoch <= lw.epochs; ++epoch) {
    BackwardResult back = backward(params, features, adj, labels, np_scores, lw, fps);
    if (!std::isfinite(back.loss.total)) {
      throw NumericError("gnn train: loss diverged (non-finite) at epoch " +
                             std::to_string(epoch),
                         back.loss.total);
    }
    result.loss_trace.push_back(back.loss.total);

    auto grad_views = back.grads.tensors();
    const double bias1 = 1.0 - std::pow(beta1, epoch);
    const double bias2 = 1.0 - std::pow(beta2, epoch);
    for (std::size_t tv = 0; tv < views.size(); ++tv) {
      auto& theta = views[tv].second;
      auto& grad = grad_views[tv].second;
      auto& m = m_state[tv];
      auto& v = v_state[tv];
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double g = grad[k] + lw.weight_decay * theta[k];
        m[k] = beta1 * m[k] + (1.0 - beta1) * g;
        v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
        const double mhat = m[k] / bias1;
        const double vhat = v[k] / bias2;
        theta[k] -= lw.learning_rate * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
  ForwardResult final = forward(params, features, adj);
  result.logits = std::move(final.logits);
  result.embeddings = std::move(final.embeddings);
  return result;
}

void save_checkpoint(const GcnParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  GcnParams& p = const_cast<GcnParams&>(params);
  auto views = p.tensors();
  out << "gcn_checkpoint v1\n" << views.size() << "\n";
  // Shapes: matrices record rows x cols, vectors record size x 1.
  auto shape_of = [&](const std::string& name) -> std::pair<std::size_t, std::size_t> {
    if (name == "w1") return {p.w1.rows, p.w1.cols};
    if (name == "res1") return {p.res1.rows, p.res1.cols};
    if (name == "w2") return {p.w2.rows, p.w2.cols};
    return {0, 0};  // filled from span size below
  };
  for (auto& [name, span] : views) {
    auto [r, cdim] = shape_of(name);
    if (r == 0) {
      r = span.size();
      cdim = 1;
    }
    out << name << " " << r << " " << cdim << "\n";
  }
  for (auto& [name, span] : views) {
    (void)name;
    out.write(reinterpret_cast<const char*>(span.data()),
              static_cast<std::streamsize>(span.size() * sizeof(double)));
  }
  if (!out) throw DataError("short write on checkpoint: " + path);
}

GcnParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::string header;
  std::getline(in, header);
  if (header != "gcn_checkpoint v1") throw DataError("bad checkpoint header in " + path);
  std::size_t count = 0;
  in >> count;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> entries;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    std::size_t r = 0, cdim = 0;
    in >> name >> r >> cdim;
    entries.emplace_back(name, r, cdim);
  }
  in.ignore();  // trailing newline before the binary payload

  // Dimensions recovered from the recorded shapes.
  std::size_t input_dim = 0, hidden = 0, embed = 0;
  for (const auto& [name, r, cdim] : entries) {
    if (name == "w1") {
      input_dim = r;
      hidden = cdim;
    }
    if (name == "w2") embed = cdim;
  }
  if (input_dim == 0 || hidden == 0 || embed == 0) {
    throw DataError("checkpoint missing layer shapes: " + path);
  }
  GcnParams p = init_params(input_dim, 0, hidden, embed);
  auto views = p.tensors();
  if (views.size() != entries.size()) throw DataError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& [name, r, cdim] = entries[i];
    if (name != views[i].first || r * cdim != views[i].second.size()) {
      throw DataError("checkpoint tensor '" + name + "' has unexpected shape");
    }
    in.read(reinterpret_cast<char*>(views[i].second.data()),
            static_cast<std::streamsize>(views[i].second.size() * sizeof(double)));
  }
  if (!in) throw DataError("short read on checkpoint: " + path);
  return p;
}

}  // namespace subdyve::gnn
