#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subdyve/features.hpp"
#include "subdyve/gnn.hpp"
#include "subdyve/lfdr.hpp"
#include "subdyve/mining.hpp"
#include "subdyve/propagation.hpp"
#include "subdyve/simnet.hpp"

namespace subdyve::refine {

// Seed bookkeeping for one stratified split. s1 members are protected: they
// stay in s_aug with their weights for the whole refinement.
struct SeedState {
  std::vector<int> s1;     // propagation seeds (sorted)
  std::vector<int> s2;     // held-out actives (sorted, disjoint from s1)
  std::vector<int> s_aug;  // augmented seeds, superset of s1 (sorted)
  std::vector<double> w;   // per-node weights, 0 outside s_aug

  static SeedState initial(const std::vector<int>& s1, const std::vector<int>& s2,
                           std::size_t n_nodes);
  bool in_s1(int node) const;
  bool in_s2(int node) const;
  bool in_aug(int node) const;
  void check_invariants() const;  // throws on violation

 private:
  std::vector<std::uint8_t> s1_mask_, s2_mask_, aug_mask_;
  friend SeedState update_seeds(const SeedState&, const std::vector<double>&,
                                const std::vector<double>&, const lfdr::LfdrModel&,
                                double, double, double, bool);
};

struct RefineConfig {
  int max_iterations = 6;
  int patience = 3;
  int n_splits = 2;
  double holdout_frac = 0.1;
  double tau_fdr = 0.1;
  double beta = 0.7;
  double baseline_b = 0.9;           // matches pi0 by default
  bool sigmoid_on_z = false;         // weight update argument: logits or z-scores
  double ef_percent = 1.0;           // early-stopping metric
  double bedroc_alpha = 85.0;        // tie-break metric
  double alpha = 0.2;                // propagation restart
  double tol = 1e-9;
  int max_prop_iter = 1000;
  gnn::LossWeights loss;
  lfdr::FitOptions lfdr_opts;
  std::uint64_t rng_seed = 0;
  unsigned threads = 1;
};

// Deterministic split: |s2| = round(frac * n) clamped to [1, n-1].
std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const std::vector<int>& s_train, double holdout_frac, std::uint64_t rng_seed);

// One LFDR-guided seed update (pre-update state semantics, ascending node
// order). Held-out s2 nodes are never added; s1 nodes are never removed.
SeedState lfdr_seed_update(const SeedState& state, const std::vector<double>& logits,
                           const std::vector<double>& z, const lfdr::LfdrModel& model,
                           const RefineConfig& cfg);

// Node features for the refinement GNN: seed weights, propagation scores,
// normalized fingerprints, RBF-to-seed similarity in PCA space (median
// bandwidth), and the hybrid PCA/NP rank average.
features::FeatureMatrix build_feature_matrix(const std::vector<double>& weights,
                                             const simnet::NormalizedAdjacency& wn,
                                             const std::vector<mining::Fingerprint>& fps,
                                             const std::vector<int>& s1,
                                             const std::vector<std::string>& node_ids,
                                             const RefineConfig& cfg);

struct IterationResult {
  SeedState state;
  double ef = 0.0;
  double bedroc = 0.0;
  std::vector<double> propagation_scores;
  std::vector<double> logits;
};

// Train -> fit LFDR on the logits -> update seeds -> re-propagate -> score
// the held-out actives. Refreshes the w / np feature columns for the next
// iteration.
IterationResult refinement_iteration(const SeedState& state,
                                     const simnet::NormalizedAdjacency& wn,
                                     const gnn::GcnAdjacency& gcn_adj,
                                     features::FeatureMatrix& feats,
                                     gnn::GcnParams& params,
                                     const std::vector<mining::Fingerprint>& fps,
                                     const RefineConfig& cfg);

struct IterationTrace {
  int iteration = 0;
  std::size_t aug_size = 0;
  double ef = 0.0;
  double bedroc = 0.0;
  bool stopped_here = false;
};

enum class StopReason { max_iter, early_stop };

struct RefinementResult {
  std::vector<double> best_weights;
  double best_ef = 0.0;
  double best_bedroc = 0.0;
  int best_iteration = 0;
  int iterations_run = 0;
  StopReason stop_reason = StopReason::max_iter;
  std::vector<IterationTrace> trace;
};

// Runs up to max_iterations refinement steps with EF-based early stopping
// (patience = consecutive non-improving iterations); returns the weights of
// the best iteration.
RefinementResult run_split(const SeedState& state0, const simnet::NormalizedAdjacency& wn,
                           const gnn::GcnAdjacency& gcn_adj, features::FeatureMatrix feats,
                           gnn::GcnParams params,
                           const std::vector<mining::Fingerprint>& fps,
                           const RefineConfig& cfg);

// Bare stopping-rule driver behind run_split; step(i) performs iteration i.
struct StepOutcome {
  double ef = 0.0;
  double bedroc = 0.0;
  std::vector<double> weights;
  std::size_t aug_size = 0;
};

RefinementResult drive_refinement(int max_iterations, int patience,
                                  const std::function<StepOutcome(int)>& step);

// Element-wise max over the splits' best weights, then one final propagation;
// returns node indices ranked by descending score (ties toward lower index).
struct EnsembleResult {
  std::vector<double> weights;
  std::vector<double> scores;
  std::vector<int> ranking;
};

EnsembleResult ensemble_and_rank(const std::vector<RefinementResult>& results,
                                 const simnet::NormalizedAdjacency& wn,
                                 const RefineConfig& cfg);

}  // namespace subdyve::refine
