#include "subdyve/mining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "subdyve/errors.hpp"
#include "subdyve/parallel.hpp"
#include "subdyve/rng.hpp"

namespace subdyve::mining {

namespace {

using chem::BondOrder;
using chem::MolGraph;

std::string atom_label(const chem::Atom& a) {
  return a.aromatic ? a.element + "~" : a.element;
}

using DoubletKey = std::tuple<std::string, int, std::string>;

// Bitset over molecules, one word per 64.
struct Bits {
  std::vector<std::uint64_t> words;
  std::size_t n = 0;

  explicit Bits(std::size_t size = 0) : words((size + 63) / 64, 0), n(size) {}
  void set(std::size_t i) { words[i / 64] |= (1ULL << (i % 64)); }
  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  Bits and_with(const Bits& other) const {
    Bits r(n);
    for (std::size_t i = 0; i < words.size(); ++i) r.words[i] = words[i] & other.words[i];
    return r;
  }
};

// R biased walks of L steps from one start atom; each walk's traversed edge
// set becomes one candidate subgraph (a sorted bond-index list).
std::vector<std::vector<int>> sample_walks(const MolGraph& mol, int start_atom,
                                           const WalkPolicy& policy, int walk_length,
                                           int restarts, Rng rng) {
  std::vector<std::vector<int>> out;
  const auto& adj = mol.adjacency();
  if (adj[static_cast<std::size_t>(start_atom)].empty()) return out;
  for (int r = 0; r < restarts; ++r) {
    std::set<int> edges;
    int u = start_atom;
    for (int step = 0; step < walk_length; ++step) {
      const auto& nbrs = adj[static_cast<std::size_t>(u)];
      if (nbrs.empty()) break;
      double total = 0.0;
      for (const auto& [v, bidx] : nbrs) {
        total += policy.preference(atom_label(mol.atoms[static_cast<std::size_t>(u)]),
                                   static_cast<int>(mol.bonds[static_cast<std::size_t>(bidx)].order),
                                   atom_label(mol.atoms[static_cast<std::size_t>(v)]));
      }
      double pick = rng.uniform() * total;
      int chosen_v = nbrs.back().first;
      int chosen_b = nbrs.back().second;
      for (const auto& [v, bidx] : nbrs) {
        const double w =
            policy.preference(atom_label(mol.atoms[static_cast<std::size_t>(u)]),
                              static_cast<int>(mol.bonds[static_cast<std::size_t>(bidx)].order),
                              atom_label(mol.atoms[static_cast<std::size_t>(v)]));
        if (pick < w) {
          chosen_v = v;
          chosen_b = bidx;
          break;
        }
        pick -= w;
      }
      edges.insert(chosen_b);
      u = chosen_v;
    }
    if (!edges.empty()) out.emplace_back(edges.begin(), edges.end());
  }
  return out;
}

MolGraph subgraph_from_edges(const MolGraph& mol, const std::vector<int>& bond_indices) {
  MolGraph g;
  std::map<int, int> remap;
  for (int bidx : bond_indices) {
    const auto& b = mol.bonds[static_cast<std::size_t>(bidx)];
    for (int endpoint : {b.a, b.b}) {
      if (remap.find(endpoint) == remap.end()) {
        chem::Atom a = mol.atoms[static_cast<std::size_t>(endpoint)];
        a.degree = 0;
        remap[endpoint] = g.add_atom(a);
      }
    }
    g.add_bond(remap[b.a], remap[b.b], b.order);
  }
  return g;
}

// Candidates of one round for one class.
struct RoundCandidates {
  std::map<std::string, MolGraph> by_canon;
  std::map<DoubletKey, std::size_t> doublet_freq;
};

void count_doublets(const MolGraph& g, std::map<DoubletKey, std::size_t>& freq) {
  for (const auto& b : g.bonds) {
    const std::string la = atom_label(g.atoms[static_cast<std::size_t>(b.a)]);
    const std::string lb = atom_label(g.atoms[static_cast<std::size_t>(b.b)]);
    freq[{la, static_cast<int>(b.order), lb}]++;
    freq[{lb, static_cast<int>(b.order), la}]++;
  }
}

RoundCandidates collect_candidates(const std::vector<MolGraph>& mols,
                                   const WalkPolicy& policy, const MiningConfig& cfg,
                                   int round, std::uint64_t class_tag) {
  // (molecule, start-atom) tasks with derived rng streams; per-task results
  // merged in task order, so the outcome does not depend on thread count.
  std::vector<std::pair<std::size_t, int>> tasks;
  for (std::size_t m = 0; m < mols.size(); ++m) {
    for (int a = 0; a < static_cast<int>(mols[m].atoms.size()); ++a) tasks.push_back({m, a});
  }
  std::vector<std::vector<std::vector<int>>> walk_results(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t ti) {
    const auto& [m, a] = tasks[ti];
    Rng rng = derive_rng(cfg.rng_seed,
                         {class_tag, static_cast<std::uint64_t>(round),
                          static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(a)});
    walk_results[ti] = sample_walks(mols[m], a, policy, cfg.walk_length, cfg.restarts, rng);
  });

  RoundCandidates out;
  // Canonical labels are cached per (molecule, edge set).
  std::vector<std::map<std::vector<int>, std::string>> canon_cache(mols.size());
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const std::size_t m = tasks[ti].first;
    for (const auto& edge_set : walk_results[ti]) {
      auto& cache = canon_cache[m];
      auto it = cache.find(edge_set);
      std::string canon;
      MolGraph sub;
      if (it == cache.end()) {
        sub = subgraph_from_edges(mols[m], edge_set);
        canon = chem::canonical_label(sub);
        cache[edge_set] = canon;
      } else {
        canon = it->second;
      }
      if (out.by_canon.find(canon) == out.by_canon.end()) {
        if (sub.atoms.empty()) sub = subgraph_from_edges(mols[m], edge_set);
        out.by_canon[canon] = std::move(sub);
      }
    }
  }
  for (const auto& [canon, g] : out.by_canon) {
    (void)canon;
    count_doublets(g, out.doublet_freq);
  }
  return out;
}

// AUC of a binary presence feature: wins plus half-ties over pos/neg pairs.
double presence_auc(std::size_t pos_with, std::size_t pos_total, std::size_t neg_with,
                    std::size_t neg_total) {
  if (pos_total == 0 || neg_total == 0) return 0.5;
  const double a1 = static_cast<double>(pos_with) / static_cast<double>(pos_total);
  const double i1 = static_cast<double>(neg_with) / static_cast<double>(neg_total);
  return a1 * (1.0 - i1) + 0.5 * (a1 * i1 + (1.0 - a1) * (1.0 - i1));
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

}  // namespace

double WalkPolicy::preference(const std::string& from_label, int order,
                              const std::string& to_label) const {
  auto it = doublet_weights.find({from_label, order, to_label});
  return it == doublet_weights.end() ? 1.0 : it->second;
}

double support_entropy(double supp_pos, double supp_neg) {
  const double total = supp_pos + supp_neg;
  if (total <= 0.0) return 0.0;
  return binary_entropy(supp_pos / total);
}

double purity_score(double supp_pos, double supp_neg) {
  if (supp_pos + supp_neg <= 0.0) return 0.0;
  return 1.0 - support_entropy(supp_pos, supp_neg);
}

std::vector<Pattern> mine_patterns(const std::vector<MolGraph>& pos,
                                   const std::vector<MolGraph>& neg,
                                   const MiningConfig& cfg) {
  if (pos.empty() || neg.empty()) {
    throw DataError("mine_patterns: both classes must be non-empty");
  }
  if (cfg.walk_length < 1) throw ConfigError("mine_patterns: walk_length must be >= 1");
  if (cfg.restarts < 1) throw ConfigError("mine_patterns: restarts must be >= 1");
  if (cfg.rounds < 1) throw ConfigError("mine_patterns: rounds must be >= 1");

  // Held-out fold for round selection: a seeded fraction of each class.
  auto split_fold = [&](std::size_t n, std::uint64_t tag) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = derive_rng(cfg.rng_seed, {0x666f6c64ULL, tag});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(idx[i - 1], idx[rng.below(i)]);
    }
    std::size_t fold_n = 0;
    if (n >= 2) {
      fold_n = static_cast<std::size_t>(std::lround(cfg.holdout_frac * static_cast<double>(n)));
      fold_n = std::clamp<std::size_t>(fold_n, 1, n - 1);
    }
    return std::pair{std::vector<std::size_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(fold_n)),
                     std::vector<std::size_t>(idx.begin() + static_cast<std::ptrdiff_t>(fold_n), idx.end())};
  };
  auto [pos_fold, pos_train] = split_fold(pos.size(), 1);
  auto [neg_fold, neg_train] = split_fold(neg.size(), 2);
  if (pos_fold.empty()) pos_fold = pos_train;  // single-molecule class fallback
  if (neg_fold.empty()) neg_fold = neg_train;

  WalkPolicy policy;
  double best_score = -1.0;
  std::map<std::string, MolGraph> best_candidates;

  for (int round = 0; round < cfg.rounds; ++round) {
    RoundCandidates pos_cands = collect_candidates(pos, policy, cfg, round, 1);
    RoundCandidates neg_cands = collect_candidates(neg, policy, cfg, round, 2);

    // Round score: best single-feature screening AUC on the held-out fold.
    double round_score = 0.0;
    {
      std::vector<const MolGraph*> cand_list;
      for (const auto& [canon, g] : pos_cands.by_canon) {
        (void)canon;
        cand_list.push_back(&g);
      }
      std::vector<double> aucs(cand_list.size(), 0.0);
      parallel_for(cand_list.size(), cfg.threads, [&](std::size_t ci) {
        std::size_t pos_with = 0, neg_with = 0;
        for (std::size_t i : pos_fold) {
          if (chem::has_embedding(*cand_list[ci], pos[i])) ++pos_with;
        }
        for (std::size_t i : neg_fold) {
          if (chem::has_embedding(*cand_list[ci], neg[i])) ++neg_with;
        }
        aucs[ci] = presence_auc(pos_with, pos_fold.size(), neg_with, neg_fold.size());
      });
      for (double a : aucs) round_score = std::max(round_score, a);
    }
    if (round_score > best_score) {
      best_score = round_score;
      best_candidates = pos_cands.by_canon;
    }

    // Refresh the walk policy from smoothed class-frequency ratios.
    std::set<DoubletKey> keys;
    for (const auto& [k, v] : pos_cands.doublet_freq) {
      (void)v;
      keys.insert(k);
    }
    for (const auto& [k, v] : neg_cands.doublet_freq) {
      (void)v;
      keys.insert(k);
    }
    WalkPolicy next;
    for (const auto& k : keys) {
      const auto pf = pos_cands.doublet_freq.count(k) ? pos_cands.doublet_freq.at(k) : 0;
      const auto nf = neg_cands.doublet_freq.count(k) ? neg_cands.doublet_freq.at(k) : 0;
      next.doublet_weights[k] = (static_cast<double>(pf) + cfg.epsilon) /
                                (static_cast<double>(nf) + cfg.epsilon);
    }
    policy = std::move(next);
  }

  // Supports over the full training sets for the winning candidate set.
  std::vector<Pattern> patterns;
  patterns.reserve(best_candidates.size());
  for (auto& [canon, g] : best_candidates) {
    Pattern p;
    p.canon = canon;
    p.graph = g;
    patterns.push_back(std::move(p));
  }
  parallel_for(patterns.size(), cfg.threads, [&](std::size_t pi) {
    std::size_t with_pos = 0, with_neg = 0;
    for (const auto& m : pos) {
      if (chem::has_embedding(patterns[pi].graph, m)) ++with_pos;
    }
    for (const auto& m : neg) {
      if (chem::has_embedding(patterns[pi].graph, m)) ++with_neg;
    }
    patterns[pi].supp_pos = static_cast<double>(with_pos) / static_cast<double>(pos.size());
    patterns[pi].supp_neg = static_cast<double>(with_neg) / static_cast<double>(neg.size());
  });
  return patterns;
}

std::vector<Pattern> select_structural_alerts(const std::vector<Pattern>& patterns,
                                              std::size_t n_pos, std::size_t n_neg,
                                              double min_gain, double max_entropy) {
  const double total = static_cast<double>(n_pos + n_neg);
  if (total <= 0.0) return {};
  const double h_y = binary_entropy(static_cast<double>(n_pos) / total);
  std::vector<Pattern> kept;
  for (const Pattern& p : patterns) {
    const double pos_with = p.supp_pos * static_cast<double>(n_pos);
    const double neg_with = p.supp_neg * static_cast<double>(n_neg);
    const double with = pos_with + neg_with;
    const double without = total - with;
    double h_cond = 0.0;
    if (with > 0.0) h_cond += (with / total) * binary_entropy(pos_with / with);
    if (without > 0.0) {
      h_cond += (without / total) *
                binary_entropy((static_cast<double>(n_pos) - pos_with) / without);
    }
    const double gain = h_y - h_cond;
    if (gain > min_gain && support_entropy(p.supp_pos, p.supp_neg) < max_entropy) {
      kept.push_back(p);
    }
  }
  return kept;
}

DiscResult build_discs(const std::vector<Pattern>& patterns,
                       const std::vector<MolGraph>& pos, const std::vector<MolGraph>& neg,
                       const DiscConfig& cfg) {
  if (patterns.empty()) throw DataError("build_discs: empty pattern list");
  if (cfg.dimension < 1) throw ConfigError("build_discs: dimension must be >= 1");
  if (cfg.k_max < 1) throw ConfigError("build_discs: k_max must be >= 1");

  const std::size_t np = patterns.size();
  std::vector<Bits> pos_bits(np, Bits(pos.size()));
  std::vector<Bits> neg_bits(np, Bits(neg.size()));
  parallel_for(np, 1, [&](std::size_t pi) {
    for (std::size_t m = 0; m < pos.size(); ++m) {
      if (chem::has_embedding(patterns[pi].graph, pos[m])) pos_bits[pi].set(m);
    }
    for (std::size_t m = 0; m < neg.size(); ++m) {
      if (chem::has_embedding(patterns[pi].graph, neg[m])) neg_bits[pi].set(m);
    }
  });

  struct Combo {
    std::vector<std::size_t> members;
    Bits pos_bits, neg_bits;
  };
  auto supports_of = [&](const Combo& c) {
    const double sp = static_cast<double>(c.pos_bits.count()) /
                      static_cast<double>(std::max<std::size_t>(pos.size(), 1));
    const double sn = static_cast<double>(c.neg_bits.count()) /
                      static_cast<double>(std::max<std::size_t>(neg.size(), 1));
    return std::pair{sp, sn};
  };

  std::vector<Disc> scored;
  std::vector<Combo> frontier;
  for (std::size_t pi = 0; pi < np; ++pi) {
    Combo c{{pi}, pos_bits[pi], neg_bits[pi]};
    auto [sp, sn] = supports_of(c);
    // 1-mers skip both the entropy filter and the support threshold.
    scored.push_back(Disc{{pi}, purity_score(sp, sn), sp, sn});
    frontier.push_back(std::move(c));
  }
  for (int level = 2; level <= cfg.k_max && !frontier.empty(); ++level) {
    std::vector<Combo> next;
    for (const Combo& c : frontier) {
      for (std::size_t pi = c.members.back() + 1; pi < np; ++pi) {
        Combo ext;
        ext.members = c.members;
        ext.members.push_back(pi);
        ext.pos_bits = c.pos_bits.and_with(pos_bits[pi]);
        const double sp = static_cast<double>(ext.pos_bits.count()) /
                          static_cast<double>(std::max<std::size_t>(pos.size(), 1));
        // Joint support is monotone non-increasing, so this prunes the whole
        // superset branch.
        if (sp < cfg.min_support) continue;
        ext.neg_bits = c.neg_bits.and_with(neg_bits[pi]);
        auto [sp2, sn] = supports_of(ext);
        scored.push_back(Disc{ext.members, purity_score(sp2, sn), sp2, sn});
        next.push_back(std::move(ext));
      }
    }
    frontier = std::move(next);
  }

  auto combo_canon = [&](const Disc& d) {
    std::vector<std::string> canons;
    for (std::size_t m : d.members) canons.push_back(patterns[m].canon);
    std::sort(canons.begin(), canons.end());
    std::string joined;
    for (std::size_t i = 0; i < canons.size(); ++i) {
      if (i) joined += '|';
      joined += canons[i];
    }
    return joined;
  };
  std::vector<std::string> canon_cache(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) canon_cache[i] = combo_canon(scored[i]);
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
    if (scored[a].supp_pos != scored[b].supp_pos) return scored[a].supp_pos > scored[b].supp_pos;
    return canon_cache[a] < canon_cache[b];
  });

  DiscResult result;
  const std::size_t take = std::min<std::size_t>(cfg.dimension, scored.size());
  result.short_dimension = take < cfg.dimension;
  for (std::size_t i = 0; i < take; ++i) result.discs.push_back(scored[order[i]]);
  return result;
}

Fingerprint encode_fingerprint(const MolGraph& mol, const std::vector<Pattern>& patterns,
                               const std::vector<Disc>& discs) {
  // Per-pattern counts computed once, shared across DiSCs.
  std::vector<std::int64_t> counts(patterns.size(), -1);
  auto count_of = [&](std::size_t pi) {
    if (counts[pi] < 0) {
      counts[pi] = static_cast<std::int64_t>(chem::count_embeddings(patterns[pi].graph, mol));
    }
    return counts[pi];
  };
  Fingerprint fp;
  fp.values.reserve(discs.size());
  for (const Disc& d : discs) {
    std::int64_t entry = std::numeric_limits<std::int64_t>::max();
    for (std::size_t m : d.members) {
      entry = std::min(entry, count_of(m));
      if (entry == 0) break;
    }
    fp.values.push_back(static_cast<std::uint32_t>(
        std::min<std::int64_t>(entry, std::numeric_limits<std::uint32_t>::max())));
  }
  return fp;
}

std::vector<std::size_t> filter_candidate_indices(const std::vector<MolGraph>& pool,
                                                  const std::vector<Pattern>& patterns) {
  std::vector<std::uint8_t> keep(pool.size(), 0);
  parallel_for(pool.size(), 1, [&](std::size_t i) {
    for (const Pattern& p : patterns) {
      if (chem::has_embedding(p.graph, pool[i])) {
        keep[i] = 1;
        break;
      }
    }
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

std::vector<MolGraph> filter_candidates(const std::vector<MolGraph>& pool,
                                        const std::vector<Pattern>& patterns) {
  std::vector<MolGraph> out;
  for (std::size_t i : filter_candidate_indices(pool, patterns)) out.push_back(pool[i]);
  return out;
}

}  // namespace subdyve::mining
