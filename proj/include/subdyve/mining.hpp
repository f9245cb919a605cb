#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "subdyve/chem.hpp"

namespace subdyve::mining {

// Mined subgraph pattern with class supports: the fraction of positive /
// negative training molecules containing at least one embedding.
struct Pattern {
  chem::MolGraph graph;
  std::string canon;
  double supp_pos = 0.0;
  double supp_neg = 0.0;
};

// Discriminative subgraph combination: a co-occurring pattern set scored by
// class purity. Joint supports are co-occurrence fractions.
struct Disc {
  std::vector<std::size_t> members;  // indices into the pattern list
  double score = 0.0;
  double supp_pos = 0.0;
  double supp_neg = 0.0;
};

// Per-molecule occurrence counts over a DiSC list; entry j is the bottleneck
// (minimum) embedding count over DiSC j's member patterns.
struct Fingerprint {
  std::vector<std::uint32_t> values;

  std::size_t size() const { return values.size(); }
};

// Ordered doublet (label_u, bond_order, label_v) preference table driving the
// biased walks. Keys always store both orientations.
struct WalkPolicy {
  std::map<std::tuple<std::string, int, std::string>, double> doublet_weights;

  double preference(const std::string& from_label, int order,
                    const std::string& to_label) const;
};

struct MiningConfig {
  int walk_length = 6;    // edges per walk
  int restarts = 20;      // walks per start atom
  int rounds = 5;
  double epsilon = 1.0;   // additive smoothing for policy updates
  double holdout_frac = 0.2;
  std::uint64_t rng_seed = 0;
  unsigned threads = 1;
};

struct DiscConfig {
  std::size_t dimension = 100;
  int k_max = 3;
  double min_support = 0.02;
};

// Supervised random-walk pattern mining over the labeled seed molecules.
// Per round, walks from every atom of every molecule sample edge-induced
// candidate subgraphs; doublet preferences are refreshed from smoothed
// class-frequency ratios; the round whose candidates score best on a held-out
// fold wins. Bitwise reproducible for a fixed seed and any thread count.
std::vector<Pattern> mine_patterns(const std::vector<chem::MolGraph>& pos,
                                   const std::vector<chem::MolGraph>& neg,
                                   const MiningConfig& cfg);

// Retains patterns whose presence feature has information gain > 1e-4 against
// the label and normalized support entropy < 0.5. Class sizes convert the
// stored support fractions back to joint counts.
std::vector<Pattern> select_structural_alerts(const std::vector<Pattern>& patterns,
                                              std::size_t n_pos, std::size_t n_neg,
                                              double min_gain = 1e-4,
                                              double max_entropy = 0.5);

struct DiscResult {
  std::vector<Disc> discs;
  bool short_dimension = false;  // fewer survivors than the requested d
};

// Branch-and-bound k-mer combination search; 1-mers skip the entropy filter,
// extensions are pruned at joint supp_pos < min_support (joint support is
// monotone non-increasing in combination size).
DiscResult build_discs(const std::vector<Pattern>& patterns,
                       const std::vector<chem::MolGraph>& pos,
                       const std::vector<chem::MolGraph>& neg, const DiscConfig& cfg);

// Entry j = min over member patterns of count_embeddings(member, mol).
Fingerprint encode_fingerprint(const chem::MolGraph& mol,
                               const std::vector<Pattern>& patterns,
                               const std::vector<Disc>& discs);

// Molecules with at least one embedding of at least one pattern, order kept.
std::vector<chem::MolGraph> filter_candidates(const std::vector<chem::MolGraph>& pool,
                                              const std::vector<Pattern>& patterns);
std::vector<std::size_t> filter_candidate_indices(const std::vector<chem::MolGraph>& pool,
                                                  const std::vector<Pattern>& patterns);

// Class-purity score 1 - H(p) with p = supp_pos/(supp_pos+supp_neg), H in
// bits; zero when both supports vanish.
double purity_score(double supp_pos, double supp_neg);

// Binary entropy (bits) of supp_pos/(supp_pos+supp_neg); 0 when both are 0.
double support_entropy(double supp_pos, double supp_neg);

}  // namespace subdyve::mining
