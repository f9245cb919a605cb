#include "subdyve/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subdyve/errors.hpp"
#include "subdyve/metrics.hpp"
#include "subdyve/rng.hpp"

namespace subdyve::refine {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<std::uint8_t> mask_of(const std::vector<int>& idx, std::size_t n) {
  std::vector<std::uint8_t> m(n, 0);
  for (int i : idx) m[static_cast<std::size_t>(i)] = 1;
  return m;
}

// EF and BEDROC of the held-out actives within the ranked candidate list
// (candidates = all nodes outside s_aug; actives = s2). The EF bucket is
// clamped to at least one entry so tiny graphs stay evaluable.
std::pair<double, double> holdout_scores(const SeedState& state,
                                         const std::vector<double>& scores,
                                         const RefineConfig& cfg) {
  std::vector<std::string> ids;
  std::vector<double> vals;
  std::vector<std::uint8_t> act;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int node = static_cast<int>(i);
    if (state.in_aug(node)) continue;  // seeds are not ranked
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%09d", node);
    ids.emplace_back(buf);
    vals.push_back(scores[i]);
    act.push_back(state.in_s2(node) ? 1 : 0);
  }
  auto rl = metrics::RankedList::from_scores(std::move(ids), std::move(vals), act);
  const std::size_t n = rl.total();
  const std::size_t n_act = rl.n_active();
  if (n == 0 || n_act == 0 || n_act == n) {
    throw NumericError("refine: held-out evaluation is degenerate");
  }
  double x_pct = cfg.ef_percent;
  if (std::floor(x_pct * static_cast<double>(n) / 100.0) < 1.0) {
    x_pct = 100.0 / static_cast<double>(n);  // smallest non-empty bucket
  }
  const double ef = metrics::enrichment_factor(rl, x_pct);
  const double bed = metrics::bedroc(rl, cfg.bedroc_alpha);
  return {ef, bed};
}

}  // namespace

SeedState SeedState::initial(const std::vector<int>& s1, const std::vector<int>& s2,
                             std::size_t n_nodes) {
  SeedState st;
  st.s1 = s1;
  st.s2 = s2;
  std::sort(st.s1.begin(), st.s1.end());
  std::sort(st.s2.begin(), st.s2.end());
  st.s_aug = st.s1;  // s1 seeds start augmented at weight 1
  st.w.assign(n_nodes, 0.0);
  for (int i : st.s_aug) st.w[static_cast<std::size_t>(i)] = 1.0;
  st.s1_mask_ = mask_of(st.s1, n_nodes);
  st.s2_mask_ = mask_of(st.s2, n_nodes);
  st.aug_mask_ = mask_of(st.s_aug, n_nodes);
  st.check_invariants();
  return st;
}

bool SeedState::in_s1(int node) const { return s1_mask_[static_cast<std::size_t>(node)] != 0; }
bool SeedState::in_s2(int node) const { return s2_mask_[static_cast<std::size_t>(node)] != 0; }
bool SeedState::in_aug(int node) const { return aug_mask_[static_cast<std::size_t>(node)] != 0; }

void SeedState::check_invariants() const {
  for (int i : s1) {
    if (!in_aug(i)) throw NumericError("seed state: s1 escaped s_aug");
    if (in_s2(i)) throw NumericError("seed state: s1 and s2 overlap");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw NumericError("seed state: weight negative or non-finite");
    }
    if (w[i] > 0.0 && !aug_mask_[i]) {
      throw NumericError("seed state: weight outside s_aug");
    }
  }
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const std::vector<int>& s_train, double holdout_frac, std::uint64_t rng_seed) {
  if (s_train.size() < 2) throw DataError("stratified_split: need at least 2 seeds");
  if (holdout_frac <= 0.0 || holdout_frac >= 1.0) {
    throw ConfigError("stratified_split: holdout fraction outside (0, 1)");
  }
  std::vector<int> shuffled = s_train;
  std::sort(shuffled.begin(), shuffled.end());
  Rng rng = derive_rng(rng_seed, {0x73706c69ULL});
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  }
  auto n2 = static_cast<std::size_t>(
      std::lround(holdout_frac * static_cast<double>(shuffled.size())));
  n2 = std::clamp<std::size_t>(n2, 1, shuffled.size() - 1);
  std::vector<int> s2(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n2));
  std::vector<int> s1(shuffled.begin() + static_cast<std::ptrdiff_t>(n2), shuffled.end());
  std::sort(s1.begin(), s1.end());
  std::sort(s2.begin(), s2.end());
  return {s1, s2};
}

SeedState update_seeds(const SeedState& state, const std::vector<double>& logits,
                       const std::vector<double>& z, const lfdr::LfdrModel& model,
                       double tau_fdr, double beta, double baseline_b, bool sigmoid_on_z) {
  SeedState next = state;
  const std::size_t n = state.w.size();
  // Every branch reads the pre-update state, so ascending order is just a
  // convention here.
  for (std::size_t i = 0; i < n; ++i) {
    const int node = static_cast<int>(i);
    const double q = lfdr::evaluate(model, z[i]);
    // The lfdr is two-sided (any density excess over the null lowers it), but
    // only the right tail marks activity; left-tail nodes are confident
    // non-actives and must not become propagation seeds.
    if (!state.in_aug(node) && q < tau_fdr && z[i] > 0.0) {
      if (state.in_s2(node)) continue;  // held-out actives stay out
      next.s_aug.push_back(node);
      next.aug_mask_[i] = 1;
      next.w[i] = 1.0;
    } else if (state.in_aug(node) && !state.in_s1(node) && q > tau_fdr) {
      next.aug_mask_[i] = 0;
      next.w[i] = 0.0;
      next.s_aug.erase(std::find(next.s_aug.begin(), next.s_aug.end(), node));
    } else if (state.in_aug(node)) {
      const double arg = sigmoid_on_z ? z[i] : logits[i];
      next.w[i] = std::max(0.0, next.w[i] + beta * (sigmoid(arg) - baseline_b));
    }
  }
  std::sort(next.s_aug.begin(), next.s_aug.end());
  next.check_invariants();
  return next;
}

SeedState lfdr_seed_update(const SeedState& state, const std::vector<double>& logits,
                           const std::vector<double>& z, const lfdr::LfdrModel& model,
                           const RefineConfig& cfg) {
  return update_seeds(state, logits, z, model, cfg.tau_fdr, cfg.beta, cfg.baseline_b,
                      cfg.sigmoid_on_z);
}

features::FeatureMatrix build_feature_matrix(const std::vector<double>& weights,
                                             const simnet::NormalizedAdjacency& wn,
                                             const std::vector<mining::Fingerprint>& fps,
                                             const std::vector<int>& s1,
                                             const std::vector<std::string>& node_ids,
                                             const RefineConfig& cfg) {
  propagation::SeedVector seed{weights, cfg.alpha};
  auto np = propagation::propagate(wn, seed, cfg.tol, cfg.max_prop_iter, cfg.threads);
  const std::size_t d = fps.empty() ? 0 : fps[0].size();
  auto pca = features::pca_project(fps, std::min<std::size_t>(16, d));
  const double gamma = features::median_heuristic_gamma(pca.projected, s1);
  auto pca_sims = features::rbf_seed_similarity(pca.projected, s1, gamma);
  auto hybrid = features::hybrid_rank(np, pca_sims);
  return features::assemble(weights, np, fps, pca_sims, hybrid, node_ids);
}

IterationResult refinement_iteration(const SeedState& state,
                                     const simnet::NormalizedAdjacency& wn,
                                     const gnn::GcnAdjacency& gcn_adj,
                                     features::FeatureMatrix& feats,
                                     gnn::GcnParams& params,
                                     const std::vector<mining::Fingerprint>& fps,
                                     const RefineConfig& cfg) {
  const std::size_t n = state.w.size();

  // Labels: held-out actives are the positives the model must recover.
  std::vector<std::uint8_t> labels(n, 0);
  for (int i : state.s2) labels[static_cast<std::size_t>(i)] = 1;

  // np scores entering the loss come from the current feature column.
  std::vector<double> np_scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    np_scores[i] = feats.rows(i, features::FeatureMatrix::kNpCol);
  }

  auto trained = gnn::train(params, feats.rows, gcn_adj, labels, np_scores, cfg.loss, fps);
  auto zres = lfdr::zscore(trained.logits);
  auto model = lfdr::fit(zres.z, cfg.lfdr_opts);

  IterationResult out;
  out.logits = trained.logits;
  out.state = lfdr_seed_update(state, trained.logits, zres.z, model, cfg);

  propagation::SeedVector seed{out.state.w, cfg.alpha};
  out.propagation_scores =
      propagation::propagate(wn, seed, cfg.tol, cfg.max_prop_iter, cfg.threads);
  auto [ef, bed] = holdout_scores(out.state, out.propagation_scores, cfg);
  out.ef = ef;
  out.bedroc = bed;

  // Refresh the w / np feature columns for the next iteration.
  for (std::size_t i = 0; i < n; ++i) {
    feats.set_weight(i, out.state.w[i]);
    feats.set_np_score(i, out.propagation_scores[i]);
  }
  return out;
}

RefinementResult drive_refinement(int max_iterations, int patience,
                                  const std::function<StepOutcome(int)>& step) {
  if (max_iterations < 1) throw ConfigError("refinement: max_iterations must be >= 1");
  if (patience < 1) throw ConfigError("refinement: patience must be >= 1");
  RefinementResult result;
  int since_best = 0;
  for (int it = 1; it <= max_iterations; ++it) {
    StepOutcome out = step(it);
    result.iterations_run = it;
    result.trace.push_back(IterationTrace{it, out.aug_size, out.ef, out.bedroc, false});

    const bool improved = result.best_iteration == 0 || out.ef > result.best_ef ||
                          (out.ef == result.best_ef && out.bedroc > result.best_bedroc);
    if (improved) {
      result.best_ef = out.ef;
      result.best_bedroc = out.bedroc;
      result.best_iteration = it;
      result.best_weights = std::move(out.weights);
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= patience) {
        result.stop_reason = StopReason::early_stop;
        result.trace.back().stopped_here = true;
        return result;
      }
    }
  }
  result.stop_reason = StopReason::max_iter;
  return result;
}

RefinementResult run_split(const SeedState& state0, const simnet::NormalizedAdjacency& wn,
                           const gnn::GcnAdjacency& gcn_adj, features::FeatureMatrix feats,
                           gnn::GcnParams params,
                           const std::vector<mining::Fingerprint>& fps,
                           const RefineConfig& cfg) {
  SeedState state = state0;
  return drive_refinement(cfg.max_iterations, cfg.patience, [&](int) {
    IterationResult step = refinement_iteration(state, wn, gcn_adj, feats, params, fps, cfg);
    state = step.state;
    return StepOutcome{step.ef, step.bedroc, state.w, state.s_aug.size()};
  });
}

EnsembleResult ensemble_and_rank(const std::vector<RefinementResult>& results,
                                 const simnet::NormalizedAdjacency& wn,
                                 const RefineConfig& cfg) {
  if (results.empty()) throw DataError("ensemble_and_rank: no split results");
  const std::size_t n = results[0].best_weights.size();
  for (const auto& r : results) {
    if (r.best_weights.size() != n) {
      throw DataError("ensemble_and_rank: inconsistent node sets across splits");
    }
  }
  EnsembleResult out;
  out.weights.assign(n, 0.0);
  for (const auto& r : results) {
    for (std::size_t i = 0; i < n; ++i) {
      out.weights[i] = std::max(out.weights[i], r.best_weights[i]);
    }
  }
  propagation::SeedVector seed{out.weights, cfg.alpha};
  out.scores = propagation::propagate(wn, seed, cfg.tol, cfg.max_prop_iter, cfg.threads);
  out.ranking.resize(n);
  std::iota(out.ranking.begin(), out.ranking.end(), 0);
  std::sort(out.ranking.begin(), out.ranking.end(), [&](int a, int b) {
    if (out.scores[static_cast<std::size_t>(a)] != out.scores[static_cast<std::size_t>(b)]) {
      return out.scores[static_cast<std::size_t>(a)] > out.scores[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  return out;
}

}  // namespace subdyve::refine
