#include "descfm/molgraph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>

#include "descfm/elements.hpp"

namespace descfm {

double bond_order_value(BondOrder order) {
  switch (order) {
    case BondOrder::Single: return 1.0;
    case BondOrder::Double: return 2.0;
    case BondOrder::Triple: return 3.0;
    case BondOrder::Aromatic: return 1.5;
  }
  return 1.0;
}

namespace {

// Tarjan bridge finding, iterative. Returns per-bond "is a bridge" flags.
std::vector<bool> find_bridges(int n_atoms, const std::vector<std::vector<Neighbor>>& adj,
                               int n_bonds) {
  std::vector<bool> bridge(static_cast<std::size_t>(n_bonds), false);
  std::vector<int> disc(static_cast<std::size_t>(n_atoms), -1);
  std::vector<int> low(static_cast<std::size_t>(n_atoms), 0);
  int timer = 0;

  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (int root = 0; root < n_atoms; ++root) {
    if (disc[root] != -1) continue;
    disc[root] = low[root] = timer++;
    stack.push_back({root, -1, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nbrs = adj[f.atom];
      if (f.next < nbrs.size()) {
        const Neighbor nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond) continue;
        if (disc[nb.atom] == -1) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& parent = stack.back();
          low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
          if (low[done.atom] > disc[parent.atom]) bridge[done.parent_bond] = true;
        }
      }
    }
  }
  return bridge;
}

std::vector<std::vector<Neighbor>> build_adjacency(int n_atoms, const std::vector<Bond>& bonds) {
  std::vector<std::vector<Neighbor>> adj(static_cast<std::size_t>(n_atoms));
  for (int b = 0; b < static_cast<int>(bonds.size()); ++b) {
    adj[bonds[b].begin].push_back({bonds[b].end, b});
    adj[bonds[b].end].push_back({bonds[b].begin, b});
  }
  return adj;
}

}  // namespace

Molecule::Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  const int n = num_atoms();
  std::set<std::pair<int, int>> seen;
  for (const Bond& b : bonds_) {
    if (b.begin < 0 || b.begin >= n || b.end < 0 || b.end >= n) {
      throw InputError("bond endpoint out of range");
    }
    if (b.begin == b.end) throw InputError("bond joins an atom to itself");
    if (!seen.emplace(std::min(b.begin, b.end), std::max(b.begin, b.end)).second) {
      throw InputError("duplicate bond between atoms " + std::to_string(b.begin) + " and " +
                       std::to_string(b.end));
    }
    if (b.order == BondOrder::Aromatic && !(atoms_[b.begin].aromatic && atoms_[b.end].aromatic)) {
      throw InputError("aromatic bond between non-aromatic atoms");
    }
  }
  adjacency_ = build_adjacency(n, bonds_);

  component_.assign(static_cast<std::size_t>(n), -1);
  for (int root = 0; root < n; ++root) {
    if (component_[root] != -1) continue;
    std::queue<int> q;
    q.push(root);
    component_[root] = n_components_;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (const Neighbor& nb : adjacency_[a]) {
        if (component_[nb.atom] == -1) {
          component_[nb.atom] = n_components_;
          q.push(nb.atom);
        }
      }
    }
    ++n_components_;
  }
  n_rings_ = num_bonds() - n + n_components_;

  const auto bridge = find_bridges(n, adjacency_, num_bonds());
  for (int b = 0; b < num_bonds(); ++b) bonds_[b].in_ring = !bridge[b];
}

int Molecule::heavy_degree(int i) const {
  int d = 0;
  for (const Neighbor& nb : neighbors(i)) d += atom(nb.atom).is_hydrogen() ? 0 : 1;
  return d;
}

int Molecule::hydrogen_count(int i) const {
  int h = atom(i).total_h();
  for (const Neighbor& nb : neighbors(i)) h += atom(nb.atom).is_hydrogen() ? 1 : 0;
  return h;
}

bool Molecule::atom_in_ring(int i) const {
  return std::any_of(neighbors(i).begin(), neighbors(i).end(),
                     [&](const Neighbor& nb) { return bond(nb.bond).in_ring; });
}

bool Molecule::unsaturated(int i) const {
  return std::any_of(neighbors(i).begin(), neighbors(i).end(),
                     [&](const Neighbor& nb) { return bond(nb.bond).order != BondOrder::Single; });
}

RingInfo perceive_rings(const Molecule& m) {
  RingInfo info;
  info.num_rings = m.num_rings();
  info.bond_in_ring.reserve(static_cast<std::size_t>(m.num_bonds()));
  for (const Bond& b : m.bonds()) info.bond_in_ring.push_back(b.in_ring);
  return info;
}

// ---------------------------------------------------------------------------
// SMILES

std::string_view to_string(SmilesErrorKind kind) {
  switch (kind) {
    case SmilesErrorKind::Empty: return "empty";
    case SmilesErrorKind::UnbalancedParentheses: return "unbalanced parentheses";
    case SmilesErrorKind::UnmatchedRingClosure: return "unmatched ring closure";
    case SmilesErrorKind::UnknownElement: return "unknown element";
    case SmilesErrorKind::ValenceExceeded: return "valence exceeded";
    case SmilesErrorKind::Syntax: return "syntax error";
  }
  return "syntax error";
}

SmilesError::SmilesError(SmilesErrorKind kind, std::size_t position, const std::string& message)
    : InputError(std::string(to_string(kind)) + " at position " + std::to_string(position) + ": " +
                 message),
      kind_(kind),
      position_(position) {}

namespace {

struct PendingBond {
  int begin;
  int end;
  std::optional<BondOrder> order;  // nullopt: default by aromaticity
};

struct RingOpening {
  int atom;
  std::optional<BondOrder> order;
  std::size_t position;
};

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view s) : s_(s) {}

  Molecule parse() {
    if (s_.empty()) fail(SmilesErrorKind::Empty, "empty SMILES");
    while (pos_ < s_.size()) step();
    if (!branches_.empty()) fail(SmilesErrorKind::UnbalancedParentheses, "unclosed '('");
    if (!rings_.empty()) {
      fail_at(SmilesErrorKind::UnmatchedRingClosure, rings_.begin()->second.position,
              "ring bond " + std::to_string(rings_.begin()->first) + " never closed");
    }
    if (pending_order_ || pending_symbol_) fail(SmilesErrorKind::Syntax, "dangling bond symbol");
    if (atoms_.empty()) fail(SmilesErrorKind::Empty, "no atoms");
    return finish();
  }

 private:
  [[noreturn]] void fail(SmilesErrorKind kind, const std::string& msg) const { fail_at(kind, pos_, msg); }
  [[noreturn]] void fail_at(SmilesErrorKind kind, std::size_t at, const std::string& msg) const {
    throw SmilesError(kind, at, msg + " in '" + std::string(s_) + "'");
  }

  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(':
        if (prev_ < 0) fail(SmilesErrorKind::Syntax, "branch without preceding atom");
        if (pending_symbol_) fail(SmilesErrorKind::Syntax, "bond symbol before '('");
        branches_.push_back(prev_);
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) fail(SmilesErrorKind::UnbalancedParentheses, "unmatched ')'");
        if (pending_symbol_) fail(SmilesErrorKind::Syntax, "dangling bond symbol before ')'");
        prev_ = branches_.back();
        branches_.pop_back();
        ++pos_;
        return;
      case '-':
      case '/':
      case '\\': set_bond(BondOrder::Single); return;
      case '=': set_bond(BondOrder::Double); return;
      case '#': set_bond(BondOrder::Triple); return;
      case ':': set_bond(BondOrder::Aromatic); return;
      case '.':
        if (pending_symbol_) fail(SmilesErrorKind::Syntax, "bond symbol before '.'");
        if (!branches_.empty()) fail(SmilesErrorKind::UnbalancedParentheses, "'.' inside a branch");
        prev_ = -1;
        ++pos_;
        return;
      case '%': {
        if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
          fail(SmilesErrorKind::Syntax, "'%' must be followed by two digits");
        }
        const int label = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
        ring_closure(label, 3);
        return;
      }
      case '[': bracket_atom(); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ring_closure(c - '0', 1);
      return;
    }
    organic_atom();
  }

  void set_bond(BondOrder order) {
    if (pending_symbol_) fail(SmilesErrorKind::Syntax, "consecutive bond symbols");
    if (prev_ < 0) fail(SmilesErrorKind::Syntax, "bond symbol without preceding atom");
    pending_order_ = order;
    pending_symbol_ = true;
    ++pos_;
  }

  void ring_closure(int label, std::size_t width) {
    if (prev_ < 0) fail(SmilesErrorKind::Syntax, "ring closure without preceding atom");
    const std::optional<BondOrder> order = pending_order_;
    pending_order_.reset();
    pending_symbol_ = false;
    auto it = rings_.find(label);
    if (it == rings_.end()) {
      rings_.emplace(label, RingOpening{prev_, order, pos_});
    } else {
      const RingOpening open = it->second;
      rings_.erase(it);
      if (open.atom == prev_) fail(SmilesErrorKind::Syntax, "ring closure onto the same atom");
      if (open.order && order && *open.order != *order) {
        fail(SmilesErrorKind::Syntax, "conflicting ring-closure bond symbols");
      }
      add_bond(open.atom, prev_, order ? order : open.order);
    }
    pos_ += width;
  }

  void add_bond(int a, int b, std::optional<BondOrder> order) {
    const auto key = std::minmax(a, b);
    if (!bond_keys_.insert(key).second) fail(SmilesErrorKind::Syntax, "duplicate bond");
    if (order == BondOrder::Aromatic && !(atoms_[a].aromatic && atoms_[b].aromatic)) {
      fail(SmilesErrorKind::Syntax, "aromatic bond between non-aromatic atoms");
    }
    bonds_.push_back({a, b, order});
  }

  void push_atom(Atom atom, bool organic_subset) {
    atoms_.push_back(std::move(atom));
    organic_.push_back(organic_subset);
    const int idx = static_cast<int>(atoms_.size()) - 1;
    if (prev_ >= 0) {
      add_bond(prev_, idx, pending_order_);
    } else if (pending_symbol_) {
      fail(SmilesErrorKind::Syntax, "bond symbol without preceding atom");
    }
    pending_order_.reset();
    pending_symbol_ = false;
    prev_ = idx;
  }

  static Atom make_atom(const ElementInfo& e, bool aromatic) {
    Atom a;
    a.element = std::string(e.symbol);
    a.atomic_number = e.atomic_number;
    a.aromatic = aromatic;
    return a;
  }

  void organic_atom() {
    const char c = s_[pos_];
    std::string_view symbol;
    bool aromatic = false;
    std::size_t width = 1;
    if (c == 'C' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'l') {
      symbol = "Cl";
      width = 2;
    } else if (c == 'B' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'r') {
      symbol = "Br";
      width = 2;
    } else {
      switch (c) {
        case 'B': symbol = "B"; break;
        case 'C': symbol = "C"; break;
        case 'N': symbol = "N"; break;
        case 'O': symbol = "O"; break;
        case 'P': symbol = "P"; break;
        case 'S': symbol = "S"; break;
        case 'F': symbol = "F"; break;
        case 'I': symbol = "I"; break;
        case 'b': symbol = "B"; aromatic = true; break;
        case 'c': symbol = "C"; aromatic = true; break;
        case 'n': symbol = "N"; aromatic = true; break;
        case 'o': symbol = "O"; aromatic = true; break;
        case 'p': symbol = "P"; aromatic = true; break;
        case 's': symbol = "S"; aromatic = true; break;
        default:
          if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
            fail(SmilesErrorKind::UnknownElement,
                 "'" + std::string(1, c) + "' is not an organic-subset atom");
          }
          fail(SmilesErrorKind::Syntax, "unexpected character '" + std::string(1, c) + "'");
      }
    }
    pos_ += width;
    push_atom(make_atom(*find_element(symbol), aromatic), true);
  }

  int read_int() {
    int v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
    }
    return v;
  }

  bool at_digit() const { return pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])); }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;
    auto expect_more = [&] {
      if (pos_ >= s_.size()) fail_at(SmilesErrorKind::Syntax, start, "unterminated bracket atom");
    };
    expect_more();
    std::optional<int> isotope;
    if (at_digit()) isotope = read_int();
    expect_more();

    const ElementInfo* element = nullptr;
    bool aromatic = false;
    const char c = s_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      for (std::string_view sym : {"se", "as", "b", "c", "n", "o", "p", "s"}) {
        if (s_.substr(pos_, sym.size()) == sym) {
          std::string upper(sym);
          upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
          element = find_element(upper);
          aromatic = true;
          pos_ += sym.size();
          break;
        }
      }
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        element = find_element(s_.substr(pos_, 2));
        if (element) pos_ += 2;
      }
      if (!element) {
        element = find_element(s_.substr(pos_, 1));
        if (element) pos_ += 1;
      }
    }
    if (!element) fail(SmilesErrorKind::UnknownElement, "unrecognised element in bracket atom");

    // chirality
    while (pos_ < s_.size() && s_[pos_] == '@') ++pos_;
    if (pos_ + 1 < s_.size() && (s_.substr(pos_, 2) == "TH" || s_.substr(pos_, 2) == "AL" ||
                                 s_.substr(pos_, 2) == "SP" || s_.substr(pos_, 2) == "TB" ||
                                 s_.substr(pos_, 2) == "OH")) {
      if (pos_ > 0 && s_[pos_ - 1] == '@') {
        pos_ += 2;
        read_int();
      }
    }

    int h = 0;
    expect_more();
    if (s_[pos_] == 'H') {
      ++pos_;
      h = at_digit() ? read_int() : 1;
    }
    expect_more();
    int charge = 0;
    if (s_[pos_] == '+' || s_[pos_] == '-') {
      const int sign = s_[pos_] == '+' ? 1 : -1;
      const char sc = s_[pos_++];
      if (at_digit()) {
        charge = sign * read_int();
      } else {
        charge = sign;
        while (pos_ < s_.size() && s_[pos_] == sc) {
          charge += sign;
          ++pos_;
        }
      }
    }
    expect_more();
    if (s_[pos_] == ':') {
      ++pos_;
      if (!at_digit()) fail(SmilesErrorKind::Syntax, "atom class needs digits");
      read_int();
    }
    expect_more();
    if (s_[pos_] != ']') fail(SmilesErrorKind::Syntax, "unexpected character in bracket atom");
    ++pos_;

    Atom a = make_atom(*element, aromatic);
    a.isotope = isotope;
    a.formal_charge = charge;
    a.explicit_h = h;
    push_atom(std::move(a), false);
  }

  Molecule finish() {
    const int n = static_cast<int>(atoms_.size());
    std::vector<Bond> bonds;
    bonds.reserve(bonds_.size());
    for (const PendingBond& pb : bonds_) {
      BondOrder order = BondOrder::Single;
      if (pb.order) {
        order = *pb.order;
      } else if (atoms_[pb.begin].aromatic && atoms_[pb.end].aromatic) {
        order = BondOrder::Aromatic;
      }
      bonds.push_back({pb.begin, pb.end, order, false});
    }

    // Aromatic bonds that are not on a cycle (e.g. the biaryl link in
    // c1ccccc1c1ccccc1) become single bonds.
    const auto adj = build_adjacency(n, bonds);
    const auto bridge = find_bridges(n, adj, static_cast<int>(bonds.size()));
    for (std::size_t b = 0; b < bonds.size(); ++b) {
      if (bonds[b].order == BondOrder::Aromatic && bridge[b]) bonds[b].order = BondOrder::Single;
    }

    for (int i = 0; i < n; ++i) {
      if (!organic_[i]) continue;
      assign_implicit_h(i, bonds, adj[i]);
    }
    return Molecule(std::move(atoms_), std::move(bonds));
  }

  // Non-aromatic atoms take the smallest standard valence >= the bond-order
  // sum. Aromatic atoms count each aromatic bond as 1 and reserve one valence
  // unit for the pi system.
  void assign_implicit_h(int i, const std::vector<Bond>& bonds, const std::vector<Neighbor>& nbrs) {
    Atom& a = atoms_[i];
    const auto valences = standard_valences(a.atomic_number);
    int sum = 0;
    for (const Neighbor& nb : nbrs) {
      const BondOrder o = bonds[nb.bond].order;
      sum += o == BondOrder::Aromatic ? 1 : static_cast<int>(bond_order_value(o));
    }
    const auto it = std::find_if(valences.begin(), valences.end(), [&](int v) { return v >= sum; });
    if (it == valences.end()) {
      throw SmilesError(SmilesErrorKind::ValenceExceeded, 0,
                        a.element + " atom " + std::to_string(i) + " has bond-order sum " +
                            std::to_string(sum) + " in '" + std::string(s_) + "'");
    }
    a.implicit_h = a.aromatic ? std::max(0, *it - sum - 1) : *it - sum;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<bool> organic_;
  std::vector<PendingBond> bonds_;
  std::set<std::pair<int, int>> bond_keys_;
  std::vector<int> branches_;
  std::map<int, RingOpening> rings_;
  int prev_ = -1;
  std::optional<BondOrder> pending_order_;
  bool pending_symbol_ = false;
};

}  // namespace

Molecule parse_smiles(std::string_view smiles) { return SmilesParser(smiles).parse(); }

// ---------------------------------------------------------------------------
// Substructure matching

bool QueryAtom::matches(const Molecule& m, int i) const {
  const Atom& a = m.atom(i);
  if (atomic_number && a.atomic_number != *atomic_number) return false;
  if (aromatic && a.aromatic != *aromatic) return false;
  if (formal_charge && a.formal_charge != *formal_charge) return false;
  if (heavy_degree && m.heavy_degree(i) != *heavy_degree) return false;
  if (hydrogen_count && m.hydrogen_count(i) != *hydrogen_count) return false;
  if (unsaturated && m.unsaturated(i) != *unsaturated) return false;
  return true;
}

QueryGraph::QueryGraph(std::vector<QueryAtom> atoms, std::vector<QueryBond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  const int n = num_atoms();
  if (n == 0) throw std::invalid_argument("query graph has no atoms");
  if (n > kMaxAtoms) throw std::invalid_argument("query graph exceeds 12 atoms");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const QueryBond& b : bonds_) {
    if (b.begin < 0 || b.begin >= n || b.end < 0 || b.end >= n || b.begin == b.end) {
      throw std::invalid_argument("query bond has invalid endpoints");
    }
    adj[b.begin].push_back(b.end);
    adj[b.end].push_back(b.begin);
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<int> stack{0};
  seen[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (int b : adj[a]) {
      if (!seen[b]) {
        seen[b] = true;
        ++reached;
        stack.push_back(b);
      }
    }
  }
  if (reached != n) throw std::invalid_argument("query graph is not connected");
}

namespace {

class SubgraphMatcher {
 public:
  SubgraphMatcher(const Molecule& m, const QueryGraph& q) : m_(m), q_(q) {
    const int n = q.num_atoms();
    qdeg_.assign(static_cast<std::size_t>(n), 0);
    qadj_.assign(static_cast<std::size_t>(n), {});
    for (int b = 0; b < static_cast<int>(q.bonds().size()); ++b) {
      const QueryBond& qb = q.bonds()[b];
      ++qdeg_[qb.begin];
      ++qdeg_[qb.end];
      qadj_[qb.begin].push_back({qb.end, b});
      qadj_[qb.end].push_back({qb.begin, b});
    }
    // BFS order so every atom after the first has an already-placed parent.
    std::vector<bool> placed(static_cast<std::size_t>(n), false);
    order_.push_back(0);
    parent_.push_back(-1);
    placed[0] = true;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      for (const Neighbor& nb : qadj_[order_[k]]) {
        if (!placed[nb.atom]) {
          placed[nb.atom] = true;
          order_.push_back(nb.atom);
          parent_.push_back(order_[k]);
        }
      }
    }
    mapping_.assign(static_cast<std::size_t>(n), -1);
    used_.assign(static_cast<std::size_t>(m.num_atoms()), false);
  }

  int count() {
    extend(0);
    return static_cast<int>(matches_.size());
  }

 private:
  bool feasible(int qa, int ma) const {
    if (used_[ma]) return false;
    if (m_.degree(ma) < qdeg_[qa]) return false;
    if (!q_.atoms()[qa].matches(m_, ma)) return false;
    for (const Neighbor& qn : qadj_[qa]) {
      const int other = mapping_[qn.atom];
      if (other < 0) continue;
      const auto& qb = q_.bonds()[qn.bond];
      bool found = false;
      for (const Neighbor& mn : m_.neighbors(ma)) {
        if (mn.atom != other) continue;
        found = !qb.order || m_.bond(mn.bond).order == *qb.order;
        break;
      }
      if (!found) return false;
    }
    return true;
  }

  void assign(int qa, int ma, std::size_t depth) {
    mapping_[qa] = ma;
    used_[ma] = true;
    extend(depth + 1);
    used_[ma] = false;
    mapping_[qa] = -1;
  }

  void extend(std::size_t depth) {
    if (depth == order_.size()) {
      std::vector<int> atoms(mapping_.begin(), mapping_.end());
      std::sort(atoms.begin(), atoms.end());
      matches_.insert(std::move(atoms));
      return;
    }
    const int qa = order_[depth];
    if (depth == 0) {
      for (int ma = 0; ma < m_.num_atoms(); ++ma) {
        if (feasible(qa, ma)) assign(qa, ma, depth);
      }
      return;
    }
    const int anchor = mapping_[parent_[depth]];
    for (const Neighbor& nb : m_.neighbors(anchor)) {
      if (feasible(qa, nb.atom)) assign(qa, nb.atom, depth);
    }
  }

  const Molecule& m_;
  const QueryGraph& q_;
  std::vector<int> qdeg_;
  std::vector<std::vector<Neighbor>> qadj_;
  std::vector<int> order_;
  std::vector<int> parent_;
  std::vector<int> mapping_;
  std::vector<bool> used_;
  std::set<std::vector<int>> matches_;
};

}  // namespace

int count_subgraph_matches(const Molecule& m, const QueryGraph& q) {
  if (q.num_atoms() > m.num_atoms()) return 0;
  return SubgraphMatcher(m, q).count();
}

// ---------------------------------------------------------------------------

Molecule canonical_reindex(const Molecule& m, std::span<const int> perm) {
  const int n = m.num_atoms();
  if (static_cast<int>(perm.size()) != n) {
    throw std::invalid_argument("permutation length " + std::to_string(perm.size()) +
                                " does not match atom count " + std::to_string(n));
  }
  std::vector<bool> hit(static_cast<std::size_t>(n), false);
  for (int p : perm) {
    if (p < 0 || p >= n || hit[p]) throw std::invalid_argument("not a permutation of atom indices");
    hit[p] = true;
  }
  std::vector<Atom> atoms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) atoms[perm[i]] = m.atom(i);
  std::vector<Bond> bonds = m.bonds();
  for (Bond& b : bonds) {
    b.begin = perm[b.begin];
    b.end = perm[b.end];
  }
  return Molecule(std::move(atoms), std::move(bonds));
}

std::vector<SmilesRecord> read_smiles_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open SMILES file '" + path + "'");
  std::vector<SmilesRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto end = line.find_first_of(" \t", first);
    SmilesRecord rec;
    rec.line = lineno;
    rec.smiles = line.substr(first, end == std::string::npos ? std::string::npos : end - first);
    if (end != std::string::npos) {
      const auto id_start = line.find_first_not_of(" \t", end);
      if (id_start != std::string::npos) {
        const auto id_end = line.find_first_of(" \t", id_start);
        rec.id = line.substr(id_start, id_end == std::string::npos ? std::string::npos : id_end - id_start);
      }
    }
    if (rec.id.empty()) rec.id = std::to_string(lineno);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace descfm
