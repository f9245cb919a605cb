#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracles {

namespace {

using subdyve::chem::BondOrder;
using subdyve::chem::MolGraph;

int bond_order_between(const MolGraph& g, int a, int b) {
  for (const auto& e : g.bonds) {
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return static_cast<int>(e.order);
  }
  return 0;
}

bool labels_match(const MolGraph& p, int pv, const MolGraph& h, int hv) {
  const auto& pa = p.atoms[static_cast<std::size_t>(pv)];
  const auto& ha = h.atoms[static_cast<std::size_t>(hv)];
  return pa.element == ha.element && pa.aromatic == ha.aromatic;
}

// Does any bijection pattern -> subset embed the pattern into the induced
// host subgraph (monomorphism: pattern edges must exist with equal order)?
bool subset_embeds(const MolGraph& pattern, const MolGraph& host,
                   const std::vector<int>& subset) {
  std::vector<int> perm(subset.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t pv = 0; pv < perm.size() && ok; ++pv) {
      if (!labels_match(pattern, static_cast<int>(pv), host, subset[static_cast<std::size_t>(perm[pv])]))
        ok = false;
    }
    for (const auto& e : pattern.bonds) {
      if (!ok) break;
      const int ha = subset[static_cast<std::size_t>(perm[static_cast<std::size_t>(e.a)])];
      const int hb = subset[static_cast<std::size_t>(perm[static_cast<std::size_t>(e.b)])];
      if (bond_order_between(host, ha, hb) != static_cast<int>(e.order)) ok = false;
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace

std::uint64_t brute_force_embedding_count(const MolGraph& pattern, const MolGraph& host) {
  const std::size_t np = pattern.atoms.size();
  const std::size_t nh = host.atoms.size();
  if (np == 0 || np > nh) return 0;
  std::uint64_t count = 0;
  std::vector<int> subset(np);
  // Enumerate all C(nh, np) subsets.
  std::vector<std::size_t> idx(np);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    for (std::size_t i = 0; i < np; ++i) subset[i] = static_cast<int>(idx[i]);
    if (subset_embeds(pattern, host, subset)) ++count;
    // next combination
    std::size_t i = np;
    while (i > 0) {
      --i;
      if (idx[i] != i + nh - np) {
        ++idx[i];
        for (std::size_t j = i + 1; j < np; ++j) idx[j] = idx[j - 1] + 1;
        break;
      }
      if (i == 0) return count;
    }
  }
}

EigenResult jacobi_eigen_symmetric(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  EigenResult r;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t col = order[oi];
    r.values.push_back(a[col][col]);
    std::vector<double> vec(n);
    for (std::size_t k = 0; k < n; ++k) vec[k] = v[k][col];
    r.vectors.push_back(std::move(vec));
  }
  return r;
}

std::vector<OracleEdge> brute_force_knn_union(
    const std::vector<std::vector<double>>& vectors, int k, double sim_min) {
  const std::size_t n = vectors.size();
  auto cos = [&](std::size_t a, std::size_t b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t t = 0; t < vectors[a].size(); ++t) {
      d += vectors[a][t] * vectors[b][t];
      na += vectors[a][t] * vectors[a][t];
      nb += vectors[b][t] * vectors[b][t];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double c = d / (std::sqrt(na) * std::sqrt(nb));
    return std::min(1.0, std::max(0.0, c));
  };
  std::vector<std::vector<bool>> keep(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> cands;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = cos(i, j);
      if (s > 0.0 && s >= sim_min) cands.push_back({s, j});
    }
    std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    for (std::size_t t = 0; t < cands.size() && t < static_cast<std::size_t>(k); ++t) {
      keep[i][cands[t].second] = true;
    }
  }
  std::vector<OracleEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (keep[i][j] || keep[j][i]) {
        edges.push_back({static_cast<int>(i), static_cast<int>(j), cos(i, j)});
      }
    }
  }
  return edges;
}

double bedroc_direct(const std::vector<bool>& active_by_rank, double alpha) {
  const double big_n = static_cast<double>(active_by_rank.size());
  double n_act = 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < active_by_rank.size(); ++r) {
    if (active_by_rank[r]) {
      n_act += 1.0;
      sum += std::exp(-alpha * static_cast<double>(r + 1) / big_n);
    }
  }
  const double ra = n_act / big_n;
  const double random_mean = (1.0 / big_n) * (1.0 - std::exp(-alpha)) /
                             (std::exp(alpha / big_n) - 1.0);
  const double rie = (sum / n_act) / random_mean;
  const double factor = ra * std::sinh(alpha / 2.0) /
                        (std::cosh(alpha / 2.0) - std::cosh(alpha / 2.0 - alpha * ra));
  const double constant = 1.0 / (1.0 - std::exp(alpha * (1.0 - ra)));
  double b = rie * factor + constant;
  if (b < 0.0) b = 0.0;
  if (b > 1.0) b = 1.0;
  return b;
}

double enrichment_factor_direct(const std::vector<bool>& active_by_rank, double x_pct) {
  const double big_n = static_cast<double>(active_by_rank.size());
  const std::size_t bucket =
      static_cast<std::size_t>(std::floor(x_pct * big_n / 100.0));
  double n_act = 0.0;
  for (bool a : active_by_rank) n_act += a ? 1.0 : 0.0;
  double in_bucket = 0.0;
  for (std::size_t r = 0; r < bucket && r < active_by_rank.size(); ++r) {
    if (active_by_rank[r]) in_bucket += 1.0;
  }
  return (in_bucket / static_cast<double>(bucket)) / (n_act / big_n);
}

double auroc_pairs(const std::vector<double>& scores, const std::vector<bool>& active) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!active[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (active[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

double two_group_lfdr(double z, double pi0, double mu1) {
  auto phi = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  };
  const double f = pi0 * phi(z) + (1.0 - pi0) * phi(z - mu1);
  return pi0 * phi(z) / f;
}

}  // namespace oracles
