#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subdyve/chem.hpp"
#include "subdyve/simnet.hpp"

namespace subdyve::synth {

// Deterministic molecule corpus with a planted motif: every active contains
// the motif at least once, every inactive contains it zero times (verified at
// generation time).
struct PlantedCorpus {
  std::vector<chem::MolGraph> molecules;
  std::vector<std::uint8_t> active;
  chem::MolGraph motif;
  std::uint64_t rng_seed = 0;
};

struct CorpusConfig {
  std::size_t n_active = 20;
  std::size_t n_inactive = 20;
  std::string motif_smiles = "NC=O";
  std::size_t scaffold_len = 10;
  std::uint64_t rng_seed = 0;
};

PlantedCorpus gen_planted_corpus(const CorpusConfig& cfg);

// Stochastic block graph: intra-block edges with probability p_in and weight
// U[0.7, 1.0], inter-block with p_out and U[0.1, 0.4]. Node ids carry the
// block: "b<block>_n<index>".
struct PartitionConfig {
  std::size_t n_per_block = 100;
  std::size_t blocks = 5;
  double p_in = 0.3;
  double p_out = 0.02;
  std::uint64_t rng_seed = 0;
};

simnet::SimilarityGraph gen_planted_partition(const PartitionConfig& cfg);

}  // namespace subdyve::synth
