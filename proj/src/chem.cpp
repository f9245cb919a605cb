#include "subdyve/chem.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace subdyve::chem {

// ---------------------------------------------------------------------------
// MolGraph
// ---------------------------------------------------------------------------

int MolGraph::add_atom(Atom a) {
  adj_valid_ = false;
  atoms.push_back(std::move(a));
  return static_cast<int>(atoms.size()) - 1;
}

bool MolGraph::add_bond(int a, int b, BondOrder order) {
  if (a == b) return false;
  if (has_bond(a, b)) return false;
  adj_valid_ = false;
  bonds.push_back(Bond{a, b, order});
  atoms[static_cast<std::size_t>(a)].degree++;
  atoms[static_cast<std::size_t>(b)].degree++;
  return true;
}

bool MolGraph::has_bond(int a, int b) const {
  for (const Bond& e : bonds) {
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return true;
  }
  return false;
}

const std::vector<std::vector<std::pair<int, int>>>& MolGraph::adjacency() const {
  if (!adj_valid_) {
    adj_.assign(atoms.size(), {});
    for (std::size_t k = 0; k < bonds.size(); ++k) {
      const Bond& e = bonds[k];
      adj_[static_cast<std::size_t>(e.a)].emplace_back(e.b, static_cast<int>(k));
      adj_[static_cast<std::size_t>(e.b)].emplace_back(e.a, static_cast<int>(k));
    }
    adj_valid_ = true;
  }
  return adj_;
}

// ---------------------------------------------------------------------------
// SMILES parsing
// ---------------------------------------------------------------------------

const char* parse_error_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::empty_input: return "empty_input";
    case ParseErrorKind::unknown_element: return "unknown_element";
    case ParseErrorKind::unclosed_ring: return "unclosed_ring";
    case ParseErrorKind::unmatched_paren: return "unmatched_paren";
    case ParseErrorKind::dangling_bond: return "dangling_bond";
    case ParseErrorKind::duplicate_bond: return "duplicate_bond";
    case ParseErrorKind::unexpected_char: return "unexpected_char";
  }
  return "unknown";
}

namespace {

constexpr std::array<const char*, 10> kOrganicSubset = {
    "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};

bool is_organic_subset(const std::string& el) {
  for (const char* s : kOrganicSubset) {
    if (el == s) return true;
  }
  return false;
}

bool is_aromatic_symbol(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

struct RingOpen {
  int atom = -1;
  int pending = 0;  // 0 = none, else BondOrder value
  std::size_t offset = 0;
};

ParseError err(ParseErrorKind kind, std::size_t offset, std::string msg) {
  return ParseError{kind, offset, std::move(msg)};
}

}  // namespace

ParseResult parse_smiles(std::string_view text, std::string id) {
  if (text.empty()) {
    return err(ParseErrorKind::empty_input, 0, "empty SMILES input");
  }

  MolGraph g;
  g.id = std::move(id);

  std::vector<int> branch_stack;
  std::vector<std::size_t> branch_offsets;
  std::map<int, RingOpen> open_rings;
  int prev = -1;
  int pending = 0;  // 0 = none, else BondOrder value
  std::size_t pending_offset = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto resolved_order = [&](int explicit_order, int a, int b) -> BondOrder {
    if (explicit_order != 0) return static_cast<BondOrder>(explicit_order);
    const bool both_aromatic = g.atoms[static_cast<std::size_t>(a)].aromatic &&
                               g.atoms[static_cast<std::size_t>(b)].aromatic;
    return both_aromatic ? BondOrder::aromatic : BondOrder::single;
  };

  auto finish_atom = [&](Atom atom, std::size_t offset) -> std::optional<ParseError> {
    const int idx = g.add_atom(std::move(atom));
    if (prev >= 0) {
      const BondOrder order = resolved_order(pending, prev, idx);
      if (!g.add_bond(prev, idx, order)) {
        return err(ParseErrorKind::duplicate_bond, offset, "duplicate bond between atoms");
      }
    } else if (pending != 0) {
      return err(ParseErrorKind::dangling_bond, pending_offset,
                 "bond symbol with no preceding atom");
    }
    prev = idx;
    pending = 0;
    return std::nullopt;
  };

  while (i < n) {
    const char c = text[i];
    const std::size_t at = i;

    if (c == '(') {
      if (prev < 0) {
        return err(ParseErrorKind::unexpected_char, at, "branch opened before any atom");
      }
      if (pending != 0) {
        return err(ParseErrorKind::dangling_bond, pending_offset,
                   "bond symbol before branch open");
      }
      branch_stack.push_back(prev);
      branch_offsets.push_back(at);
      ++i;
      continue;
    }
    if (c == ')') {
      if (branch_stack.empty()) {
        return err(ParseErrorKind::unmatched_paren, at, "unmatched closing parenthesis");
      }
      if (pending != 0) {
        return err(ParseErrorKind::dangling_bond, pending_offset,
                   "bond symbol before branch close");
      }
      prev = branch_stack.back();
      branch_stack.pop_back();
      branch_offsets.pop_back();
      ++i;
      continue;
    }
    if (c == '-' || c == '=' || c == '#' || c == ':') {
      if (pending != 0) {
        return err(ParseErrorKind::dangling_bond, at, "two consecutive bond symbols");
      }
      pending = (c == '-')   ? static_cast<int>(BondOrder::single)
                : (c == '=') ? static_cast<int>(BondOrder::double_bond)
                : (c == '#') ? static_cast<int>(BondOrder::triple)
                             : static_cast<int>(BondOrder::aromatic);
      pending_offset = at;
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
      int ring = 0;
      if (c == '%') {
        if (i + 2 >= n || !std::isdigit(static_cast<unsigned char>(text[i + 1])) ||
            !std::isdigit(static_cast<unsigned char>(text[i + 2]))) {
          return err(ParseErrorKind::unexpected_char, at, "%% must be followed by two digits");
        }
        ring = (text[i + 1] - '0') * 10 + (text[i + 2] - '0');
        i += 3;
      } else {
        ring = c - '0';
        ++i;
      }
      if (prev < 0) {
        return err(ParseErrorKind::unexpected_char, at, "ring closure before any atom");
      }
      auto it = open_rings.find(ring);
      if (it == open_rings.end()) {
        open_rings[ring] = RingOpen{prev, pending, at};
        pending = 0;
        continue;
      }
      const RingOpen open = it->second;
      open_rings.erase(it);
      if (open.atom == prev) {
        return err(ParseErrorKind::duplicate_bond, at, "ring closure forms a self-loop");
      }
      int explicit_order = 0;
      if (open.pending != 0 && pending != 0 && open.pending != pending) {
        return err(ParseErrorKind::dangling_bond, at,
                   "conflicting bond symbols on ring closure");
      }
      explicit_order = open.pending != 0 ? open.pending : pending;
      const BondOrder order = resolved_order(explicit_order, open.atom, prev);
      if (!g.add_bond(open.atom, prev, order)) {
        return err(ParseErrorKind::duplicate_bond, at, "ring closure duplicates a bond");
      }
      pending = 0;
      continue;
    }
    if (c == '[') {
      std::size_t j = i + 1;
      Atom atom;
      if (j < n && std::isupper(static_cast<unsigned char>(text[j]))) {
        atom.element.push_back(text[j]);
        ++j;
        if (j < n && std::islower(static_cast<unsigned char>(text[j]))) {
          atom.element.push_back(text[j]);
          ++j;
        }
      } else if (j < n && is_aromatic_symbol(text[j])) {
        atom.element.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text[j]))));
        atom.aromatic = true;
        ++j;
      } else {
        return err(ParseErrorKind::unknown_element, j <= n ? j : n,
                   "bracket atom must start with an element symbol");
      }
      // Optional hydrogen count: recorded nowhere (implicit H are not modeled).
      if (j < n && text[j] == 'H') {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      // Optional charge: "+", "-", repeated signs, or sign followed by digits.
      if (j < n && (text[j] == '+' || text[j] == '-')) {
        const char sign_char = text[j];
        const int sign = sign_char == '+' ? 1 : -1;
        int magnitude = 0;
        while (j < n && text[j] == sign_char) {
          ++magnitude;
          ++j;
        }
        if (magnitude == 1 && j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
          magnitude = 0;
          while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
            magnitude = magnitude * 10 + (text[j] - '0');
            ++j;
          }
        }
        atom.formal_charge = sign * magnitude;
      }
      if (j >= n || text[j] != ']') {
        return err(ParseErrorKind::unexpected_char, std::min(j, n - 1),
                   "unterminated bracket atom");
      }
      ++j;
      if (auto e = finish_atom(std::move(atom), at)) return *e;
      i = j;
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string el(1, c);
      if (i + 1 < n && std::islower(static_cast<unsigned char>(text[i + 1]))) {
        const std::string two = el + text[i + 1];
        if (two == "Cl" || two == "Br") {
          el = two;
        }
      }
      if (!is_organic_subset(el)) {
        return err(ParseErrorKind::unknown_element, at, "unknown element symbol '" + el + "'");
      }
      Atom atom;
      atom.element = el;
      if (auto e = finish_atom(std::move(atom), at)) return *e;
      i += el.size();
      continue;
    }
    if (is_aromatic_symbol(c)) {
      Atom atom;
      atom.element = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      atom.aromatic = true;
      if (auto e = finish_atom(std::move(atom), at)) return *e;
      ++i;
      continue;
    }
    return err(ParseErrorKind::unexpected_char, at,
               std::string("unexpected character '") + c + "'");
  }

  if (pending != 0) {
    return err(ParseErrorKind::dangling_bond, pending_offset, "trailing bond symbol");
  }
  if (!branch_stack.empty()) {
    return err(ParseErrorKind::unmatched_paren, branch_offsets.back(),
               "unclosed branch parenthesis");
  }
  if (!open_rings.empty()) {
    const auto& first = *open_rings.begin();
    return err(ParseErrorKind::unclosed_ring, first.second.offset,
               "unclosed ring closure " + std::to_string(first.first));
  }
  return g;
}

MolGraph parse_smiles_or_throw(std::string_view text, std::string id) {
  ParseResult r = parse_smiles(text, std::move(id));
  if (std::holds_alternative<ParseError>(r)) {
    const ParseError& e = std::get<ParseError>(r);
    throw std::invalid_argument("SMILES parse failed at byte " + std::to_string(e.offset) +
                                " (" + std::string(parse_error_name(e.kind)) + "): " + e.message +
                                " in \"" + std::string(text) + "\"");
  }
  return std::move(std::get<MolGraph>(r));
}

// ---------------------------------------------------------------------------
// Canonical labeling: iterative neighborhood refinement with full
// individualisation backtracking on ties, then a canonical DFS emitting
// SMILES over the winning vertex order.
// ---------------------------------------------------------------------------

namespace {

struct CanonContext {
  const MolGraph& g;
  const std::vector<int>& verts;              // component vertex list
  std::vector<int> local;                     // global -> local index, -1 outside
  std::vector<std::vector<std::pair<int, int>>> nbrs;  // local adjacency (local nbr, order)

  explicit CanonContext(const MolGraph& graph, const std::vector<int>& vs)
      : g(graph), verts(vs), local(graph.atoms.size(), -1) {
    for (std::size_t k = 0; k < verts.size(); ++k) local[static_cast<std::size_t>(verts[k])] = static_cast<int>(k);
    nbrs.resize(verts.size());
    const auto& adj = g.adjacency();
    for (std::size_t k = 0; k < verts.size(); ++k) {
      for (const auto& [nb, bidx] : adj[static_cast<std::size_t>(verts[k])]) {
        const int ln = local[static_cast<std::size_t>(nb)];
        if (ln >= 0) {
          nbrs[k].emplace_back(ln, static_cast<int>(g.bonds[static_cast<std::size_t>(bidx)].order));
        }
      }
    }
  }

  std::size_t size() const { return verts.size(); }

  const Atom& atom(std::size_t li) const {
    return g.atoms[static_cast<std::size_t>(verts[li])];
  }
};

// Rank vertices by signature; returns dense colors in [0, #distinct).
template <typename Sig>
std::vector<int> rank_by(const std::vector<Sig>& sigs) {
  std::vector<std::size_t> idx(sigs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return sigs[a] < sigs[b]; });
  std::vector<int> colors(sigs.size(), 0);
  int c = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && sigs[idx[i - 1]] < sigs[idx[i]]) ++c;
    colors[idx[i]] = c;
  }
  return colors;
}

std::vector<int> initial_colors(const CanonContext& ctx) {
  using Sig = std::tuple<std::string, bool, int, int>;
  std::vector<Sig> sigs(ctx.size());
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const Atom& a = ctx.atom(i);
    sigs[i] = Sig{a.element, a.aromatic, a.formal_charge, static_cast<int>(ctx.nbrs[i].size())};
  }
  return rank_by(sigs);
}

int count_colors(const std::vector<int>& colors) {
  int mx = -1;
  for (int c : colors) mx = std::max(mx, c);
  return mx + 1;
}

void refine(const CanonContext& ctx, std::vector<int>& colors) {
  using Sig = std::pair<int, std::vector<std::pair<int, int>>>;
  int prev_count = count_colors(colors);
  while (true) {
    std::vector<Sig> sigs(ctx.size());
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      std::vector<std::pair<int, int>> near;
      near.reserve(ctx.nbrs[i].size());
      for (const auto& [nb, order] : ctx.nbrs[i]) near.emplace_back(order, colors[static_cast<std::size_t>(nb)]);
      std::sort(near.begin(), near.end());
      sigs[i] = Sig{colors[i], std::move(near)};
    }
    std::vector<int> next = rank_by(sigs);
    const int next_count = count_colors(next);
    colors = std::move(next);
    if (next_count == prev_count) break;
    prev_count = next_count;
  }
}

// Certificate of a discrete coloring: atom labels in position order plus the
// full position-pair bond list. Total order on certificates picks the winner.
std::string certificate(const CanonContext& ctx, const std::vector<int>& order) {
  // order[p] = local vertex at canonical position p
  std::vector<int> pos(ctx.size());
  for (std::size_t p = 0; p < order.size(); ++p) pos[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
  std::string cert;
  for (std::size_t p = 0; p < order.size(); ++p) {
    const Atom& a = ctx.atom(static_cast<std::size_t>(order[p]));
    cert += a.element;
    cert += a.aromatic ? '~' : '.';
    cert += std::to_string(a.formal_charge);
    cert += ';';
  }
  std::vector<std::array<int, 3>> edges;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    for (const auto& [nb, order_value] : ctx.nbrs[i]) {
      const int pi = pos[i];
      const int pj = pos[static_cast<std::size_t>(nb)];
      if (pi < pj) edges.push_back({pi, pj, order_value});
    }
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    cert += std::to_string(e[0]);
    cert += ',';
    cert += std::to_string(e[1]);
    cert += ',';
    cert += std::to_string(e[2]);
    cert += ';';
  }
  return cert;
}

struct CanonSearch {
  const CanonContext& ctx;
  std::string best_cert;
  std::vector<int> best_order;
  bool have_best = false;

  explicit CanonSearch(const CanonContext& c) : ctx(c) {}

  void run(std::vector<int> colors) {
    refine(ctx, colors);
    const int nc = count_colors(colors);
    if (static_cast<std::size_t>(nc) == ctx.size()) {
      std::vector<int> order(ctx.size());
      for (std::size_t i = 0; i < ctx.size(); ++i) order[static_cast<std::size_t>(colors[i])] = static_cast<int>(i);
      std::string cert = certificate(ctx, order);
      if (!have_best || cert < best_cert) {
        best_cert = std::move(cert);
        best_order = std::move(order);
        have_best = true;
      }
      return;
    }
    // Smallest non-singleton color class; branch on each member.
    std::vector<int> class_size(static_cast<std::size_t>(nc), 0);
    for (int c : colors) class_size[static_cast<std::size_t>(c)]++;
    int target = -1;
    for (int c = 0; c < nc; ++c) {
      if (class_size[static_cast<std::size_t>(c)] > 1) {
        target = c;
        break;
      }
    }
    for (std::size_t v = 0; v < ctx.size(); ++v) {
      if (colors[v] != target) continue;
      std::vector<int> child(ctx.size());
      for (std::size_t u = 0; u < ctx.size(); ++u) child[u] = colors[u] * 2 + 1;
      child[v] -= 1;  // v drops just below its former class
      run(std::move(child));
    }
  }
};

bool needs_bracket(const Atom& a) {
  return a.formal_charge != 0 || !is_organic_subset(a.element);
}

std::string atom_token(const Atom& a) {
  std::string sym = a.element;
  if (a.aromatic) {
    for (char& c : sym) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (!needs_bracket(a)) return sym;
  std::string out = "[" + sym;
  if (a.formal_charge > 0) {
    out += '+';
    if (a.formal_charge > 1) out += std::to_string(a.formal_charge);
  } else if (a.formal_charge < 0) {
    out += '-';
    if (a.formal_charge < -1) out += std::to_string(-a.formal_charge);
  }
  out += ']';
  return out;
}

std::string bond_token(BondOrder order, const Atom& a, const Atom& b) {
  switch (order) {
    case BondOrder::single:
      return (a.aromatic && b.aromatic) ? "-" : "";
    case BondOrder::aromatic:
      return (a.aromatic && b.aromatic) ? "" : ":";
    case BondOrder::double_bond:
      return "=";
    case BondOrder::triple:
      return "#";
  }
  return "";
}

std::string ring_digit(int num) {
  if (num < 10) return std::to_string(num);
  if (num < 100) return "%" + std::to_string(num);
  throw std::runtime_error("more than 99 ring closures in one component");
}

// Emits SMILES over the canonical order: DFS from position 0, neighbors in
// ascending canonical position, back edges as ring closures.
std::string emit_smiles(const CanonContext& ctx, const std::vector<int>& order) {
  const std::size_t n = ctx.size();
  std::vector<int> pos(n);
  for (std::size_t p = 0; p < n; ++p) pos[static_cast<std::size_t>(order[p])] = static_cast<int>(p);

  // Sorted neighbor lists by canonical position.
  std::vector<std::vector<std::pair<int, int>>> sorted_nbrs(n);  // (local nbr, order)
  for (std::size_t i = 0; i < n; ++i) {
    sorted_nbrs[i] = ctx.nbrs[i];
    std::sort(sorted_nbrs[i].begin(), sorted_nbrs[i].end(),
              [&](const auto& x, const auto& y) {
                return pos[static_cast<std::size_t>(x.first)] < pos[static_cast<std::size_t>(y.first)];
              });
  }

  std::vector<bool> visited(n, false);
  std::vector<int> parent(n, -1);
  // Ring closures: map (min local, max local) -> digit, assigned on first
  // encounter during emission.
  std::map<std::pair<int, int>, int> ring_numbers;
  int next_ring = 1;

  // First pass: classify tree vs ring edges with the same traversal the
  // emitter uses, so digits are assigned in output order.
  std::vector<std::pair<int, int>> ring_edges;  // (u, v) local, discovered at u
  {
    std::vector<bool> seen(n, false);
    std::vector<int> par(n, -1);
    seen[static_cast<std::size_t>(order[0])] = true;
    // Recursive DFS mirroring the emission traversal exactly.
    std::function<void(int)> dfs = [&](int u) {
      for (const auto& [v, bond_order] : sorted_nbrs[static_cast<std::size_t>(u)]) {
        (void)bond_order;
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = true;
          par[static_cast<std::size_t>(v)] = u;
          dfs(v);
        } else if (v != par[static_cast<std::size_t>(u)]) {
          const std::pair<int, int> k{std::min(u, v), std::max(u, v)};
          if (ring_numbers.find(k) == ring_numbers.end()) {
            ring_numbers[k] = 0;  // placeholder; numbered below
            ring_edges.emplace_back(u, v);
          }
        }
      }
    };
    dfs(order[0]);
    parent = par;
  }

  // Assign ring-closure digits by the canonical position of the earlier
  // (opening) endpoint. Digits are never reused, so each number maps to one
  // edge unambiguously.
  {
    std::vector<std::pair<int, std::pair<int, int>>> by_open;
    by_open.reserve(ring_edges.size());
    for (const auto& [u, v] : ring_edges) {
      const int open_pos =
          std::min(pos[static_cast<std::size_t>(u)], pos[static_cast<std::size_t>(v)]);
      by_open.push_back({open_pos, {std::min(u, v), std::max(u, v)}});
    }
    std::sort(by_open.begin(), by_open.end());
    for (const auto& [p, k] : by_open) {
      (void)p;
      ring_numbers[k] = next_ring++;
    }
  }

  std::string out;
  std::function<void(int)> emit = [&](int u) {
    visited[static_cast<std::size_t>(u)] = true;
    out += atom_token(ctx.atom(static_cast<std::size_t>(u)));
    // Ring closure digits on this atom, ordered by digit.
    std::vector<std::pair<int, std::pair<int, int>>> here;
    for (const auto& [v, bond_order] : sorted_nbrs[static_cast<std::size_t>(u)]) {
      if (v == parent[static_cast<std::size_t>(u)] || parent[static_cast<std::size_t>(v)] == u) continue;
      auto it = ring_numbers.find({std::min(u, v), std::max(u, v)});
      if (it != ring_numbers.end()) here.push_back({it->second, {v, bond_order}});
    }
    std::sort(here.begin(), here.end());
    for (const auto& [digit, edge] : here) {
      const auto& [v, bond_order] = edge;
      // Bond symbol only at the opening (earlier) end.
      if (pos[static_cast<std::size_t>(u)] < pos[static_cast<std::size_t>(v)]) {
        out += bond_token(static_cast<BondOrder>(bond_order), ctx.atom(static_cast<std::size_t>(u)),
                          ctx.atom(static_cast<std::size_t>(v)));
      }
      out += ring_digit(digit);
    }
    // Tree children in canonical order.
    std::vector<std::pair<int, int>> children;
    for (const auto& [v, bond_order] : sorted_nbrs[static_cast<std::size_t>(u)]) {
      if (parent[static_cast<std::size_t>(v)] == u) children.push_back({v, bond_order});
    }
    for (std::size_t ci = 0; ci < children.size(); ++ci) {
      const auto& [v, bond_order] = children[ci];
      const std::string bt = bond_token(static_cast<BondOrder>(bond_order),
                                        ctx.atom(static_cast<std::size_t>(u)), ctx.atom(static_cast<std::size_t>(v)));
      if (ci + 1 < children.size()) {
        out += '(';
        out += bt;
        emit(v);
        out += ')';
      } else {
        out += bt;
        emit(v);
      }
    }
  };
  emit(order[0]);
  return out;
}

std::vector<std::vector<int>> connected_components(const MolGraph& g) {
  const auto& adj = g.adjacency();
  std::vector<int> comp(g.atoms.size(), -1);
  std::vector<std::vector<int>> comps;
  for (std::size_t s = 0; s < g.atoms.size(); ++s) {
    if (comp[s] >= 0) continue;
    const int c = static_cast<int>(comps.size());
    comps.emplace_back();
    std::vector<int> stack{static_cast<int>(s)};
    comp[s] = c;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comps[static_cast<std::size_t>(c)].push_back(u);
      for (const auto& [v, b] : adj[static_cast<std::size_t>(u)]) {
        (void)b;
        if (comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = c;
          stack.push_back(v);
        }
      }
    }
  }
  return comps;
}

}  // namespace

std::string canonical_label(const MolGraph& g) {
  if (g.atoms.empty()) return "";
  std::vector<std::string> parts;
  for (const auto& comp : connected_components(g)) {
    CanonContext ctx(g, comp);
    CanonSearch search(ctx);
    search.run(initial_colors(ctx));
    parts.push_back(emit_smiles(ctx, search.best_order));
  }
  std::sort(parts.begin(), parts.end());
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out += '.';
    out += parts[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subgraph matching
// ---------------------------------------------------------------------------

namespace {

struct Matcher {
  const MolGraph& pattern;
  const MolGraph& host;
  std::vector<int> order;                 // pattern vertices in connectivity order
  std::vector<std::vector<std::pair<int, int>>> back_edges;  // per step: (earlier step, order)
  std::vector<int> anchor;                // step -> earlier step adjacent, or -1
  std::vector<int> anchor_order;          // bond order to anchor

  std::vector<int> image;                 // pattern vertex (by step) -> host atom
  std::vector<bool> used;                 // host atoms in use
  bool count_mode = true;
  bool found = false;
  bool small_mask_supported = false;
  std::unordered_set<std::uint64_t> masks;
  std::unordered_set<std::string> keys;

  Matcher(const MolGraph& p, const MolGraph& h) : pattern(p), host(h) {
    build_order();
    image.assign(order.size(), -1);
    used.assign(host.atoms.size(), false);
    small_mask_supported = host.atoms.size() <= 64;
  }

  void build_order() {
    const std::size_t np = pattern.atoms.size();
    const auto& padj = pattern.adjacency();
    std::vector<int> step_of(np, -1);
    std::vector<bool> queued(np, false);
    for (std::size_t root = 0; root < np; ++root) {
      if (step_of[root] >= 0) continue;
      std::vector<int> bfs{static_cast<int>(root)};
      queued[root] = true;
      for (std::size_t qi = 0; qi < bfs.size(); ++qi) {
        const int u = bfs[qi];
        step_of[static_cast<std::size_t>(u)] = static_cast<int>(order.size());
        order.push_back(u);
        for (const auto& [v, b] : padj[static_cast<std::size_t>(u)]) {
          (void)b;
          if (!queued[static_cast<std::size_t>(v)]) {
            queued[static_cast<std::size_t>(v)] = true;
            bfs.push_back(v);
          }
        }
      }
    }
    back_edges.assign(np, {});
    anchor.assign(np, -1);
    anchor_order.assign(np, 0);
    for (std::size_t t = 0; t < order.size(); ++t) {
      const int u = order[t];
      for (const auto& [v, bidx] : padj[static_cast<std::size_t>(u)]) {
        const int sv = step_of[static_cast<std::size_t>(v)];
        if (sv >= 0 && static_cast<std::size_t>(sv) < t) {
          const int bo = static_cast<int>(pattern.bonds[static_cast<std::size_t>(bidx)].order);
          if (anchor[t] < 0) {
            anchor[t] = sv;
            anchor_order[t] = bo;
          } else {
            back_edges[t].push_back({sv, bo});
          }
        }
      }
    }
  }

  static bool atom_match(const Atom& p, const Atom& h) {
    return p.element == h.element && p.aromatic == h.aromatic;
  }

  int host_bond_order(int a, int b) const {
    const auto& hadj = host.adjacency();
    for (const auto& [v, bidx] : hadj[static_cast<std::size_t>(a)]) {
      if (v == b) return static_cast<int>(host.bonds[static_cast<std::size_t>(bidx)].order);
    }
    return 0;
  }

  void record() {
    if (count_mode) {
      if (small_mask_supported) {
        std::uint64_t m = 0;
        for (int h : image) m |= (1ULL << h);
        masks.insert(m);
      } else {
        std::vector<int> sorted(image);
        std::sort(sorted.begin(), sorted.end());
        std::string key;
        for (int h : sorted) {
          key += std::to_string(h);
          key += ',';
        }
        keys.insert(std::move(key));
      }
    } else {
      found = true;
    }
  }

  void search(std::size_t t) {
    if (!count_mode && found) return;
    if (t == order.size()) {
      record();
      return;
    }
    const int pu = order[t];
    const Atom& patom = pattern.atoms[static_cast<std::size_t>(pu)];
    auto try_host = [&](int h) {
      if (used[static_cast<std::size_t>(h)]) return;
      if (!atom_match(patom, host.atoms[static_cast<std::size_t>(h)])) return;
      for (const auto& [sv, bo] : back_edges[t]) {
        if (host_bond_order(image[static_cast<std::size_t>(sv)], h) != bo) return;
      }
      used[static_cast<std::size_t>(h)] = true;
      image[t] = h;
      search(t + 1);
      image[t] = -1;
      used[static_cast<std::size_t>(h)] = false;
    };
    const int anc = anchor[t];
    if (anc >= 0) {
      const int ha = image[static_cast<std::size_t>(anc)];
      const auto& hadj = host.adjacency();
      for (const auto& [hv, bidx] : hadj[static_cast<std::size_t>(ha)]) {
        if (static_cast<int>(host.bonds[static_cast<std::size_t>(bidx)].order) != anchor_order[t])
          continue;
        try_host(hv);
        if (!count_mode && found) return;
      }
    } else {
      for (std::size_t h = 0; h < host.atoms.size(); ++h) {
        try_host(static_cast<int>(h));
        if (!count_mode && found) return;
      }
    }
  }
};

}  // namespace

std::uint64_t count_embeddings(const MolGraph& pattern, const MolGraph& host) {
  if (pattern.atoms.empty() || pattern.atoms.size() > host.atoms.size()) return 0;
  Matcher m(pattern, host);
  m.count_mode = true;
  m.search(0);
  return m.small_mask_supported ? m.masks.size() : m.keys.size();
}

bool has_embedding(const MolGraph& pattern, const MolGraph& host) {
  if (pattern.atoms.empty() || pattern.atoms.size() > host.atoms.size()) return false;
  Matcher m(pattern, host);
  m.count_mode = false;
  m.search(0);
  return m.found;
}

}  // namespace subdyve::chem
