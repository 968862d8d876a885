#include <algorithm>
#include <random>

#include "descfm/molgraph.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace descfm;

namespace {

int count_ring_bonds(const Molecule& m) {
  return static_cast<int>(std::count_if(m.bonds().begin(), m.bonds().end(), [](const Bond& b) { return b.in_ring; }));
}

// A bond is on a cycle iff its endpoints stay connected without it.
bool bond_on_cycle_by_deletion(const Molecule& m, int skip) {
  const Bond& target = m.bond(skip);
  std::vector<bool> seen(static_cast<std::size_t>(m.num_atoms()), false);
  std::vector<int> stack{target.begin};
  seen[target.begin] = true;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (int b = 0; b < m.num_bonds(); ++b) {
      if (b == skip) continue;
      const Bond& bond = m.bond(b);
      int other = -1;
      if (bond.begin == a) other = bond.end;
      if (bond.end == a) other = bond.begin;
      if (other >= 0 && !seen[other]) {
        seen[other] = true;
        stack.push_back(other);
      }
    }
  }
  return seen[target.end];
}

}  // namespace

TEST_CASE("parse_smiles: methane gets four implicit hydrogens") {
  const Molecule m = parse_smiles("C");
  REQUIRE(m.num_atoms() == 1);
  CHECK(m.atom(0).element == "C");
  CHECK(m.atom(0).implicit_h == 4);
  CHECK_FALSE(m.atom(0).explicit_h.has_value());
}

TEST_CASE("parse_smiles: benzene") {
  const Molecule m = parse_smiles("c1ccccc1");
  REQUIRE(m.num_atoms() == 6);
  REQUIRE(m.num_bonds() == 6);
  for (const Atom& a : m.atoms()) {
    CHECK(a.aromatic);
    CHECK(a.implicit_h == 1);
  }
  for (const Bond& b : m.bonds()) {
    CHECK(b.in_ring);
    CHECK(b.order == BondOrder::Aromatic);
  }
  CHECK(m.num_rings() == 1);
}

TEST_CASE("parse_smiles: acetic acid") {
  const Molecule m = parse_smiles("CC(=O)O");
  REQUIRE(m.num_atoms() == 4);
  CHECK(std::count_if(m.bonds().begin(), m.bonds().end(),
                      [](const Bond& b) { return b.order == BondOrder::Double; }) == 1);
  CHECK(m.atom(0).implicit_h == 3);
  CHECK(m.atom(1).implicit_h == 0);
  CHECK(m.atom(2).implicit_h == 0);
  CHECK(m.atom(3).implicit_h == 1);
}

TEST_CASE("parse_smiles: dot separates components") {
  const Molecule m = parse_smiles("C1CC1.C");
  CHECK(m.num_components() == 2);
  CHECK(m.num_rings() == 1);
}

TEST_CASE("parse_smiles: bracket atoms, isotopes, charges and stereo markers") {
  const Molecule m = parse_smiles("[13CH3][N+](C)(C)C.[Cl-]");
  CHECK(m.atom(0).isotope == 13);
  CHECK(m.atom(0).explicit_h == 3);
  CHECK(m.atom(0).implicit_h == 0);
  CHECK(m.atom(1).formal_charge == 1);
  CHECK(m.atom(5).formal_charge == -1);
  CHECK(m.atom(5).element == "Cl");

  const Molecule stereo = parse_smiles("F/C=C\\F");
  CHECK(stereo.num_atoms() == 4);
  CHECK(stereo.bond(1).order == BondOrder::Double);
  const Molecule chiral = parse_smiles("N[C@@H](C)C(=O)O");
  CHECK(chiral.atom(1).explicit_h == 1);
  CHECK(chiral.hydrogen_count(1) == 1);

  const Molecule pyrrole = parse_smiles("c1cc[nH]c1");
  CHECK(pyrrole.atom(3).explicit_h == 1);
  const Molecule charge2 = parse_smiles("[Fe++]");
  CHECK(charge2.atom(0).formal_charge == 2);
  CHECK(parse_smiles("[Fe+2]").atom(0).formal_charge == 2);
  CHECK(parse_smiles("[se]1cccc1").atom(0).element == "Se");
}

TEST_CASE("parse_smiles: ring-closure forms") {
  const Molecule pct = parse_smiles("C%10CCC%10");
  CHECK(pct.num_rings() == 1);
  const Molecule dbl = parse_smiles("C=1CCC=1");
  CHECK(dbl.bond(3).order == BondOrder::Double);
  const Molecule dbl2 = parse_smiles("C1CCC=1");
  CHECK(dbl2.bond(3).order == BondOrder::Double);
  // biaryl link between aromatic rings is a single bond
  const Molecule biphenyl = parse_smiles("c1ccccc1c1ccccc1");
  CHECK(biphenyl.bond(6).order == BondOrder::Single);
  CHECK_FALSE(biphenyl.bond(6).in_ring);
}

TEST_CASE("parse_smiles: aromatic hydrogen assignment") {
  CHECK(parse_smiles("c1ccncc1").atom(3).implicit_h == 0);
  CHECK(parse_smiles("c1ccoc1").atom(3).implicit_h == 0);
  CHECK(parse_smiles("c1ccsc1").atom(3).implicit_h == 0);
  const Molecule naph = parse_smiles("c1ccc2ccccc2c1");
  CHECK(naph.atom(3).implicit_h == 0);
  CHECK(naph.atom(8).implicit_h == 0);
  CHECK(naph.atom(0).implicit_h == 1);
  CHECK(parse_smiles("Cn1cccc1").atom(1).implicit_h == 0);
  CHECK(parse_smiles("O=c1cccc[nH]1").atom(1).implicit_h == 0);
}

TEST_CASE("parse_smiles: explicit hydrogen atoms are counted on their neighbour") {
  const Molecule m = parse_smiles("[H]C([H])O");
  CHECK(m.atom(1).implicit_h == 1);
  CHECK(m.hydrogen_count(1) == 3);
  CHECK(m.heavy_degree(1) == 1);
}

TEST_CASE("parse_smiles: valence choices for N, P, S") {
  CHECK(parse_smiles("CN(=O)=O").atom(1).implicit_h == 0);  // valence 5
  CHECK(parse_smiles("CS(=O)C").atom(1).implicit_h == 0);   // valence 4
  CHECK(parse_smiles("CS(=O)(=O)C").atom(1).implicit_h == 0);
  CHECK(parse_smiles("CS").atom(1).implicit_h == 1);
  CHECK(parse_smiles("CP(C)C").atom(1).implicit_h == 0);
  CHECK(parse_smiles("C=P").atom(1).implicit_h == 1);
  CHECK(parse_smiles("B").atom(0).implicit_h == 3);
}

TEST_CASE("parse_smiles: malformed strings raise the documented error class") {
  struct Case {
    const char* smiles;
    SmilesErrorKind kind;
  };
  const Case cases[] = {
      {"", SmilesErrorKind::Empty},
      {"C(C", SmilesErrorKind::UnbalancedParentheses},
      {"CC)C", SmilesErrorKind::UnbalancedParentheses},
      {"C(C(C)", SmilesErrorKind::UnbalancedParentheses},
      {"C1CC", SmilesErrorKind::UnmatchedRingClosure},
      {"C1CC2CC1", SmilesErrorKind::UnmatchedRingClosure},
      {"C%12CC", SmilesErrorKind::UnmatchedRingClosure},
      {"CXC", SmilesErrorKind::UnknownElement},
      {"[Xx]", SmilesErrorKind::UnknownElement},
      {"C*C", SmilesErrorKind::UnknownElement},
      {"Q", SmilesErrorKind::UnknownElement},
      {"C(=C)(=C)=C", SmilesErrorKind::ValenceExceeded},
      {"FC(F)(F)(F)F", SmilesErrorKind::ValenceExceeded},
      {"O=O=O", SmilesErrorKind::ValenceExceeded},
      {"ClCl=C", SmilesErrorKind::ValenceExceeded},
      {"C==C", SmilesErrorKind::Syntax},
      {"C=", SmilesErrorKind::Syntax},
      {"[CH4", SmilesErrorKind::Syntax},
      {"C11", SmilesErrorKind::Syntax},
      {"C:C", SmilesErrorKind::Syntax},
  };
  for (const Case& c : cases) {
    CAPTURE(c.smiles);
    try {
      parse_smiles(c.smiles);
      FAIL("expected a SmilesError");
    } catch (const SmilesError& e) {
      CHECK(e.kind() == c.kind);
    }
  }
}

TEST_CASE("parse_smiles: agrees with RDKit hydrogen and ring counts on the corpus") {
  const auto rows = oracle::read_csv(oracle::data_path("rdkit_reference.csv"));
  REQUIRE(rows.size() == 2000);
  for (const auto& row : rows) {
    CAPTURE(row[0]);
    const Molecule m = parse_smiles(row[0]);
    int heavy = 0;
    int h = 0;
    for (int i = 0; i < m.num_atoms(); ++i) {
      if (m.atom(i).is_hydrogen()) continue;
      ++heavy;
      h += m.hydrogen_count(i);
    }
    CHECK(heavy == std::stoi(row[1]));
    CHECK(h == std::stoi(row[2]));
    CHECK(m.num_rings() == std::stoi(row[3]));
  }
}

TEST_CASE("implicit-H conservation on the corpus") {
  for (const auto& smi : oracle::corpus_smiles()) {
    const Molecule m = parse_smiles(smi);
    for (int i = 0; i < m.num_atoms(); ++i) {
      const Atom& a = m.atom(i);
      if (a.explicit_h) continue;  // bracket atom: hydrogens are as written
      CAPTURE(smi);
      CAPTURE(i);
      double order_sum = 0.0;
      int aromatic_sum = 0;
      for (const Neighbor& nb : m.neighbors(i)) {
        order_sum += bond_order_value(m.bond(nb.bond).order);
        aromatic_sum += m.bond(nb.bond).order == BondOrder::Aromatic ? 1 : static_cast<int>(bond_order_value(m.bond(nb.bond).order));
      }
      const std::vector<int> allowed = [&] {
        switch (a.atomic_number) {
          case 5: return std::vector<int>{3};
          case 6: return std::vector<int>{4};
          case 7: return std::vector<int>{3, 5};
          case 8: return std::vector<int>{2};
          case 15: return std::vector<int>{3, 5};
          case 16: return std::vector<int>{2, 4, 6};
          default: return std::vector<int>{1};
        }
      }();
      if (!a.aromatic) {
        const int total = static_cast<int>(std::ceil(order_sum)) + a.implicit_h;
        CHECK(std::find(allowed.begin(), allowed.end(), total) != allowed.end());
      } else {
        // one valence unit goes to the aromatic system; atoms that donate a
        // lone pair (furan O, thiophene S) end up with no hydrogen
        const int total = aromatic_sum + 1 + a.implicit_h;
        CHECK((std::find(allowed.begin(), allowed.end(), total) != allowed.end() || a.implicit_h == 0));
      }
    }
  }
}

TEST_CASE("perceive_rings: examples") {
  const auto ethane = perceive_rings(parse_smiles("CC"));
  CHECK(ethane.num_rings == 0);
  CHECK(ethane.bond_in_ring == std::vector<bool>{false});

  const auto benzene = perceive_rings(parse_smiles("c1ccccc1"));
  CHECK(benzene.num_rings == 1);
  CHECK(std::count(benzene.bond_in_ring.begin(), benzene.bond_in_ring.end(), true) == 6);

  const Molecule naph = parse_smiles("c1ccc2ccccc2c1");
  const auto nr = perceive_rings(naph);
  CHECK(nr.num_rings == 2);
  CHECK(std::count(nr.bond_in_ring.begin(), nr.bond_in_ring.end(), true) == 11);
  for (int b = 0; b < naph.num_bonds(); ++b) CHECK(nr.bond_in_ring[b] == bond_on_cycle_by_deletion(naph, b));

  const Molecule spiro = parse_smiles("C1CCC2(CC1)CC2CC");
  CHECK(perceive_rings(spiro).num_rings == 2);
  CHECK(count_ring_bonds(spiro) == 9);
}

TEST_CASE("ring flags match the deletion oracle on the corpus") {
  for (const auto& smi : oracle::corpus_smiles()) {
    const Molecule m = parse_smiles(smi);
    for (int b = 0; b < m.num_bonds(); ++b) {
      CAPTURE(smi);
      CHECK(m.bond(b).in_ring == bond_on_cycle_by_deletion(m, b));
    }
  }
}

TEST_CASE("cyclomatic identity holds on 1000 random parseable SMILES") {
  std::mt19937_64 rng(99);
  int parsed = 0;
  int attempts = 0;
  while (parsed < 1000) {
    REQUIRE(++attempts < 200000);
    const std::string s = oracle::random_smiles(rng);
    try {
      const Molecule m = parse_smiles(s);
      CAPTURE(s);
      CHECK(m.num_rings() == m.num_bonds() - m.num_atoms() + m.num_components());
      CHECK(m.num_rings() >= 0);
      ++parsed;
    } catch (const SmilesError&) {
    }
  }
}

TEST_CASE("adjacency mirrors the bond list") {
  for (const auto& smi : oracle::corpus_smiles()) {
    const Molecule m = parse_smiles(smi);
    int entries = 0;
    for (int i = 0; i < m.num_atoms(); ++i) {
      for (const Neighbor& nb : m.neighbors(i)) {
        const Bond& b = m.bond(nb.bond);
        CHECK(((b.begin == i && b.end == nb.atom) || (b.end == i && b.begin == nb.atom)));
        ++entries;
      }
    }
    CHECK(entries == 2 * m.num_bonds());
  }
}

TEST_CASE("Molecule constructor rejects inconsistent graphs") {
  Atom c;
  c.element = "C";
  c.atomic_number = 6;
  CHECK_THROWS_AS(Molecule({c, c}, {{0, 0, BondOrder::Single}}), InputError);
  CHECK_THROWS_AS(Molecule({c, c}, {{0, 1, BondOrder::Single}, {1, 0, BondOrder::Double}}), InputError);
  CHECK_THROWS_AS(Molecule({c, c}, {{0, 2, BondOrder::Single}}), InputError);
  CHECK_THROWS_AS(Molecule({c, c}, {{0, 1, BondOrder::Aromatic}}), InputError);
}

TEST_CASE("count_subgraph_matches: examples") {
  const QueryGraph carbonyl({QueryAtom{.atomic_number = 6}, QueryAtom{.atomic_number = 8}},
                            {{0, 1, BondOrder::Double}});
  CHECK(count_subgraph_matches(parse_smiles("CC(=O)O"), carbonyl) == 1);

  const QueryGraph hydroxyl({QueryAtom{.atomic_number = 8, .hydrogen_count = 1}, QueryAtom{}},
                            {{0, 1, BondOrder::Single}});
  CHECK(count_subgraph_matches(parse_smiles("OCCO"), hydroxyl) == 2);

  const QueryGraph nitrogen({QueryAtom{.atomic_number = 7}}, {});
  CHECK(count_subgraph_matches(parse_smiles("C"), nitrogen) == 0);

  // automorphic embeddings of a symmetric pattern collapse to one atom set
  const QueryGraph ccc({QueryAtom{.atomic_number = 6}, QueryAtom{.atomic_number = 6}, QueryAtom{.atomic_number = 6}},
                       {{0, 1, std::nullopt}, {1, 2, std::nullopt}});
  CHECK(count_subgraph_matches(parse_smiles("CCC"), ccc) == 1);
  CHECK(count_subgraph_matches(parse_smiles("c1ccccc1"), ccc) == 6);
  CHECK(count_subgraph_matches(parse_smiles("CC(C)C"), ccc) == 3);
}

TEST_CASE("QueryGraph validates its shape") {
  CHECK_THROWS_AS(QueryGraph({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(QueryGraph({QueryAtom{}, QueryAtom{}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(QueryGraph(std::vector<QueryAtom>(13), {}), std::invalid_argument);
  CHECK_THROWS_AS(QueryGraph({QueryAtom{}}, {{0, 0, std::nullopt}}), std::invalid_argument);
}

TEST_CASE("count_subgraph_matches equals exhaustive enumeration on random patterns") {
  std::mt19937_64 rng(5);
  const auto smiles = oracle::corpus_smiles();
  const int elements[] = {6, 7, 8, 16};
  std::uniform_int_distribution<int> pick_el(0, 3), pick_size(1, 4), coin(0, 2);
  int checked = 0;
  for (std::size_t i = 0; i < smiles.size() && checked < 300; i += 5) {
    const Molecule m = parse_smiles(smiles[i]);
    if (m.num_atoms() > 12) continue;
    const int k = pick_size(rng);
    std::vector<QueryAtom> atoms(static_cast<std::size_t>(k));
    std::vector<QueryBond> bonds;
    for (int a = 0; a < k; ++a) {
      if (coin(rng) != 0) atoms[a].atomic_number = elements[pick_el(rng)];
      if (a > 0) {
        std::uniform_int_distribution<int> parent(0, a - 1);
        std::optional<BondOrder> order;
        if (coin(rng) == 0) order = BondOrder::Double;
        if (coin(rng) == 1) order = BondOrder::Single;
        bonds.push_back({parent(rng), a, order});
      }
    }
    if (k == 4 && coin(rng) == 0) bonds.push_back({0, 3, std::nullopt});  // allow a cycle
    const QueryGraph q(atoms, bonds);
    CAPTURE(smiles[i]);
    CHECK(count_subgraph_matches(m, q) == oracle::enumerate_matches(m, q));
    ++checked;
  }
  CHECK(checked >= 200);
}

TEST_CASE("canonical_reindex") {
  const Molecule propane = parse_smiles("CCC");
  const std::vector<int> identity{0, 1, 2};
  CHECK(canonical_reindex(propane, identity) == propane);

  const std::vector<int> reversal{2, 1, 0};
  const Molecule r = canonical_reindex(propane, reversal);
  CHECK(r.num_bonds() == 2);
  CHECK(r.heavy_degree(1) == 2);
  CHECK(r.atom(0).implicit_h == 3);

  CHECK_THROWS_AS(canonical_reindex(propane, std::vector<int>{0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(canonical_reindex(propane, std::vector<int>{0, 0, 1}), std::invalid_argument);

  std::mt19937_64 rng(3);
  const Molecule naph = parse_smiles("c1ccc2ccccc2c1");
  const Molecule p = canonical_reindex(naph, oracle::random_permutation(naph.num_atoms(), rng));
  CHECK(p.num_rings() == 2);
  CHECK(count_ring_bonds(p) == 11);
}

TEST_CASE("read_smiles_file skips comments and keeps identifiers") {
  const auto recs = read_smiles_file(oracle::data_path("corpus.smi"));
  REQUIRE(recs.size() == 2000);
  CHECK(recs.front().id == "mol0");
  CHECK(recs.front().line == 2);
  CHECK_THROWS_AS(read_smiles_file("/nonexistent/file.smi"), InputError);
}
