#include "subdyve/synth.hpp"

#include <stdexcept>

#include "subdyve/errors.hpp"
#include "subdyve/rng.hpp"

namespace subdyve::synth {

namespace {

using chem::BondOrder;
using chem::MolGraph;

// Random branched scaffold over C/N/O single bonds, occasionally closing a
// benzene ring. Stays inside the parser subset.
MolGraph random_scaffold(Rng& rng, std::size_t target_atoms) {
  MolGraph g;
  auto add = [&](const char* el, bool aromatic = false) {
    chem::Atom a;
    a.element = el;
    a.aromatic = aromatic;
    return g.add_atom(a);
  };
  auto random_element = [&]() -> const char* {
    const auto r = rng.below(10);
    if (r < 7) return "C";
    if (r < 9) return "N";
    return "O";
  };
  add(random_element());
  while (g.atoms.size() < target_atoms) {
    if (g.atoms.size() + 6 <= target_atoms && rng.bernoulli(0.25)) {
      // Fuse a benzene ring onto a random attachment atom.
      const int attach = static_cast<int>(rng.below(g.atoms.size()));
      int first = -1, prev = -1;
      for (int k = 0; k < 6; ++k) {
        const int idx = add("C", true);
        if (first < 0) first = idx;
        if (prev >= 0) g.add_bond(prev, idx, BondOrder::aromatic);
        prev = idx;
      }
      g.add_bond(prev, first, BondOrder::aromatic);
      g.add_bond(attach, first, BondOrder::single);
    } else {
      const int attach = static_cast<int>(rng.below(g.atoms.size()));
      const int idx = add(random_element());
      g.add_bond(attach, idx, BondOrder::single);
    }
  }
  return g;
}

// Grafts a copy of the motif onto a random scaffold atom via a single bond.
void graft_motif(MolGraph& scaffold, const MolGraph& motif, Rng& rng) {
  const int attach = static_cast<int>(rng.below(scaffold.atoms.size()));
  std::vector<int> remap(motif.atoms.size());
  for (std::size_t i = 0; i < motif.atoms.size(); ++i) {
    chem::Atom a = motif.atoms[i];
    a.degree = 0;
    remap[i] = scaffold.add_atom(a);
  }
  for (const auto& b : motif.bonds) {
    scaffold.add_bond(remap[static_cast<std::size_t>(b.a)],
                      remap[static_cast<std::size_t>(b.b)], b.order);
  }
  scaffold.add_bond(attach, remap[0], BondOrder::single);
}

}  // namespace

PlantedCorpus gen_planted_corpus(const CorpusConfig& cfg) {
  PlantedCorpus corpus;
  corpus.rng_seed = cfg.rng_seed;
  corpus.motif = chem::parse_smiles_or_throw(cfg.motif_smiles, "motif");
  if (cfg.scaffold_len < corpus.motif.atoms.size()) {
    throw ConfigError("gen_planted_corpus: scaffold_len smaller than the motif");
  }

  Rng rng = derive_rng(cfg.rng_seed, {0x636f7270ULL});
  char idbuf[32];
  for (std::size_t i = 0; i < cfg.n_active; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200) {
        throw NumericError("gen_planted_corpus: could not graft the motif");
      }
      MolGraph mol = random_scaffold(rng, cfg.scaffold_len);
      graft_motif(mol, corpus.motif, rng);
      if (chem::count_embeddings(corpus.motif, mol) >= 1) {
        std::snprintf(idbuf, sizeof(idbuf), "ACT%04zu", i);
        mol.id = idbuf;
        corpus.molecules.push_back(std::move(mol));
        corpus.active.push_back(1);
        break;
      }
    }
  }
  for (std::size_t i = 0; i < cfg.n_inactive; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200) {
        throw NumericError("gen_planted_corpus: could not build a motif-free scaffold");
      }
      MolGraph mol = random_scaffold(rng, cfg.scaffold_len);
      if (chem::count_embeddings(corpus.motif, mol) == 0) {
        std::snprintf(idbuf, sizeof(idbuf), "INA%04zu", i);
        mol.id = idbuf;
        corpus.molecules.push_back(std::move(mol));
        corpus.active.push_back(0);
        break;
      }
    }
  }
  return corpus;
}

simnet::SimilarityGraph gen_planted_partition(const PartitionConfig& cfg) {
  if (!(cfg.p_out >= 0.0 && cfg.p_out < cfg.p_in && cfg.p_in <= 1.0)) {
    throw ConfigError("gen_planted_partition: need 0 <= p_out < p_in <= 1");
  }
  simnet::SimilarityGraph g;
  const std::size_t n = cfg.n_per_block * cfg.blocks;
  char idbuf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(idbuf, sizeof(idbuf), "b%zu_n%zu", i / cfg.n_per_block,
                  i % cfg.n_per_block);
    g.node_ids.push_back(idbuf);
  }
  Rng rng = derive_rng(cfg.rng_seed, {0x73626d00ULL});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same = (i / cfg.n_per_block) == (j / cfg.n_per_block);
      const double p = same ? cfg.p_in : cfg.p_out;
      if (rng.bernoulli(p)) {
        const double w = same ? rng.uniform(0.7, 1.0) : rng.uniform(0.1, 0.4);
        g.edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
      }
    }
  }
  return g;
}

}  // namespace subdyve::synth
