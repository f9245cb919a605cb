#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace subdyve::chem {

enum class BondOrder : std::uint8_t {
  single = 1,
  double_bond = 2,
  triple = 3,
  aromatic = 4,
};

struct Atom {
  std::string element;
  bool aromatic = false;
  int formal_charge = 0;
  int degree = 0;  // maintained by MolGraph::add_bond
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::single;
};

// Labeled undirected molecular graph. Implicit hydrogens are never
// materialized; stereochemistry and isotopes are out of scope.
struct MolGraph {
  std::string id;
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int add_atom(Atom a);
  // Returns false on self-loops and duplicate pairs.
  bool add_bond(int a, int b, BondOrder order);
  bool has_bond(int a, int b) const;

  // Adjacency as (neighbor atom index, bond index) per atom; rebuilt on
  // demand and cached.
  const std::vector<std::vector<std::pair<int, int>>>& adjacency() const;

 private:
  mutable std::vector<std::vector<std::pair<int, int>>> adj_;
  mutable bool adj_valid_ = false;
};

enum class ParseErrorKind {
  empty_input,
  unknown_element,
  unclosed_ring,
  unmatched_paren,
  dangling_bond,
  duplicate_bond,
  unexpected_char,
};

struct ParseError {
  ParseErrorKind kind;
  std::size_t offset = 0;  // byte offset into the input
  std::string message;
};

const char* parse_error_name(ParseErrorKind kind);

using ParseResult = std::variant<MolGraph, ParseError>;

// Parses the supported SMILES subset: organic-subset atoms
// (B,C,N,O,P,S,F,Cl,Br,I), aromatic lowercase (b,c,n,o,p,s), bracket atoms
// with optional hydrogen count (ignored) and charge, branches, ring closures
// (digits and %nn), and bond symbols - = # :.
ParseResult parse_smiles(std::string_view text, std::string id = "");

// Convenience wrapper for inputs known to be valid (tests, generators).
// Throws std::invalid_argument on parse failure.
MolGraph parse_smiles_or_throw(std::string_view text, std::string id = "");

// Canonical label: a canonical SMILES string. Two MolGraphs with the same
// element/aromatic/charge labels and bond orders are isomorphic iff their
// labels are equal. The label re-parses under parse_smiles, so it doubles as
// the serialization format.
std::string canonical_label(const MolGraph& g);

inline std::string to_smiles(const MolGraph& g) { return canonical_label(g); }

// Number of distinct host atom subsets S (|S| = |pattern|) whose induced
// subgraph contains a label-preserving monomorphic image of the pattern.
// Elements, aromatic flags and bond orders must match; formal charge is not
// compared. Each subset is counted once regardless of automorphisms.
std::uint64_t count_embeddings(const MolGraph& pattern, const MolGraph& host);

// True iff count_embeddings(pattern, host) > 0, with early exit.
bool has_embedding(const MolGraph& pattern, const MolGraph& host);

}  // namespace subdyve::chem
