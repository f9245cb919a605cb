#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive (exhaustive enumeration, textbook formulas) and share no
// code with the library paths they check.

#include <cstdint>
#include <string>
#include <vector>

#include "subdyve/chem.hpp"

namespace oracles {

// Counts host atom subsets of size |pattern| whose induced subgraph contains
// the pattern, by enumerating every subset and every vertex bijection.
// Intended for hosts with <= 12 atoms.
std::uint64_t brute_force_embedding_count(const subdyve::chem::MolGraph& pattern,
                                          const subdyve::chem::MolGraph& host);

// Dense symmetric eigendecomposition by cyclic Jacobi rotations. Returns
// eigenvalues (descending) and matching eigenvectors as rows.
struct EigenResult {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};
EigenResult jacobi_eigen_symmetric(std::vector<std::vector<double>> a);

// Brute-force union-of-kNN graph over cosine similarities.
struct OracleEdge {
  int i, j;
  double w;
};
std::vector<OracleEdge> brute_force_knn_union(
    const std::vector<std::vector<double>>& vectors, int k, double sim_min);

// Direct-formula early-recognition metrics over a ranked active mask
// (index 0 = rank 1).
double bedroc_direct(const std::vector<bool>& active_by_rank, double alpha);
double enrichment_factor_direct(const std::vector<bool>& active_by_rank, double x_pct);
// Pair-counting AUROC over scores (larger = ranked better); ties count 1/2.
double auroc_pairs(const std::vector<double>& scores, const std::vector<bool>& active);

// Closed-form lfdr for the two-group normal mixture
// pi0*N(0,1) + (1-pi0)*N(mu1,1).
double two_group_lfdr(double z, double pi0, double mu1);

}  // namespace oracles
