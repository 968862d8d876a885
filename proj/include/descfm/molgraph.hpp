#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "descfm/errors.hpp"

namespace descfm {

enum class BondOrder : std::uint8_t { Single, Double, Triple, Aromatic };

// Bond order as a real number; aromatic bonds count 1.5.
double bond_order_value(BondOrder order);

struct Atom {
  std::string element;  // canonical capitalised symbol, e.g. "C", "Cl"
  int atomic_number = 0;
  int formal_charge = 0;
  bool aromatic = false;
  std::optional<int> isotope;
  std::optional<int> explicit_h;  // set for bracket atoms only
  int implicit_h = 0;

  int total_h() const { return implicit_h + explicit_h.value_or(0); }
  bool is_hydrogen() const { return atomic_number == 1; }

  bool operator==(const Atom&) const = default;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::Single;
  bool in_ring = false;

  int other(int atom) const { return atom == begin ? end : begin; }

  bool operator==(const Bond&) const = default;
};

struct Neighbor {
  int atom;
  int bond;
};

// Immutable molecular graph. Construction validates the bond list, builds the
// adjacency lists and runs ring perception, so every instance satisfies the
// adjacency and ring-flag invariants.
class Molecule {
 public:
  // Hydrogen counts on `atoms` are taken as given. Ring flags on `bonds` are
  // recomputed. Throws InputError on self-loops, duplicate bonds, out-of-range
  // endpoints or aromatic bonds between non-aromatic atoms.
  Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Neighbor> neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  int num_components() const { return n_components_; }
  // Cyclomatic number: bonds - atoms + components.
  int num_rings() const { return n_rings_; }

  // Component label per atom, numbered in order of first appearance.
  const std::vector<int>& component_of() const { return component_; }

  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  // Number of non-hydrogen neighbours.
  int heavy_degree(int i) const;
  // Implicit + bracket hydrogens + explicit hydrogen atoms bonded to `i`.
  int hydrogen_count(int i) const;
  bool atom_in_ring(int i) const;
  // True when any bond at the atom is double, triple or aromatic.
  bool unsaturated(int i) const;

  bool operator==(const Molecule& other) const {
    return atoms_ == other.atoms_ && bonds_ == other.bonds_;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<int> component_;
  int n_components_ = 0;
  int n_rings_ = 0;
};

enum class SmilesErrorKind {
  Empty,
  UnbalancedParentheses,
  UnmatchedRingClosure,
  UnknownElement,
  ValenceExceeded,
  Syntax,
};

std::string_view to_string(SmilesErrorKind kind);

class SmilesError : public InputError {
 public:
  SmilesError(SmilesErrorKind kind, std::size_t position, const std::string& message);

  SmilesErrorKind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  SmilesErrorKind kind_;
  std::size_t position_;
};

// Parses the supported SMILES subset: organic-subset and aromatic bare atoms,
// bracket atoms with isotope/charge/H count, branches, ring closures (digits and
// %nn), bond symbols `- = # :` and `.` separated components. Stereo markers are
// accepted and dropped.
Molecule parse_smiles(std::string_view smiles);

struct RingInfo {
  int num_rings = 0;
  std::vector<bool> bond_in_ring;
};

// Cyclomatic ring count plus per-bond ring membership (a bond is in a ring iff
// it is not a bridge).
RingInfo perceive_rings(const Molecule& m);

struct QueryAtom {
  std::optional<int> atomic_number;  // nullopt = any element
  std::optional<bool> aromatic;
  std::optional<int> formal_charge;
  std::optional<int> heavy_degree;
  std::optional<int> hydrogen_count;
  std::optional<bool> unsaturated;

  bool matches(const Molecule& m, int atom) const;
};

struct QueryBond {
  int begin = 0;
  int end = 0;
  std::optional<BondOrder> order;  // nullopt = any order
};

class QueryGraph {
 public:
  static constexpr int kMaxAtoms = 12;

  // Throws std::invalid_argument if the pattern is empty, disconnected, larger
  // than kMaxAtoms or has invalid bond endpoints.
  QueryGraph(std::vector<QueryAtom> atoms, std::vector<QueryBond> bonds);

  const std::vector<QueryAtom>& atoms() const { return atoms_; }
  const std::vector<QueryBond>& bonds() const { return bonds_; }
  int num_atoms() const { return static_cast<int>(atoms_.size()); }

 private:
  std::vector<QueryAtom> atoms_;
  std::vector<QueryBond> bonds_;
};

// Number of distinct matched atom sets over all subgraph embeddings of `q` in
// `m`. Automorphic re-mappings onto the same atoms count once.
int count_subgraph_matches(const Molecule& m, const QueryGraph& q);

// Relabels atoms so that old atom i becomes new atom perm[i]. Bonds are
// re-sorted by their new endpoints. Throws std::invalid_argument when perm is
// not a permutation of the atom indices.
Molecule canonical_reindex(const Molecule& m, std::span<const int> perm);

struct SmilesRecord {
  std::string smiles;
  std::string id;
  std::size_t line = 0;
};

// Reads a SMILES corpus: one SMILES per line, optional whitespace-separated
// identifier, blank and `#` lines skipped. Missing identifiers default to the
// 1-based line number.
std::vector<SmilesRecord> read_smiles_file(const std::string& path);

}  // namespace descfm
