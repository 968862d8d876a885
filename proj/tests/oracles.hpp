#pragma once

// Independent reference implementations used only by the tests. None of these
// call into the code paths they check.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "descfm/molgraph.hpp"

namespace oracle {

inline std::string data_path(const std::string& name) { return std::string(DESCFM_TEST_DATA) + "/" + name; }

inline std::vector<std::string> corpus_smiles() {
  std::vector<std::string> out;
  for (const auto& rec : descfm::read_smiles_file(data_path("corpus.smi"))) out.push_back(rec.smiles);
  return out;
}

// Splits one CSV line on commas (fixtures never quote).
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(split_csv(line));
  }
  return rows;
}

// Heavy-atom distance matrix by Floyd-Warshall over the bond list. Unreachable
// pairs stay at a large sentinel.
inline constexpr int kUnreachable = 1 << 20;

inline std::vector<std::vector<int>> floyd_warshall(const descfm::Molecule& m, std::vector<int>* heavy_ids) {
  std::vector<int> ids;
  std::vector<int> index(static_cast<std::size_t>(m.num_atoms()), -1);
  for (int i = 0; i < m.num_atoms(); ++i) {
    if (m.atom(i).atomic_number != 1) {
      index[i] = static_cast<int>(ids.size());
      ids.push_back(i);
    }
  }
  const std::size_t n = ids.size();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kUnreachable));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& b : m.bonds()) {
    if (index[b.begin] >= 0 && index[b.end] >= 0) d[index[b.begin]][index[b.end]] = d[index[b.end]][index[b.begin]] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  if (heavy_ids) *heavy_ids = ids;
  return d;
}

// Wiener index and Balaban J of a connected heavy-atom graph via Floyd-Warshall.
struct PathIndices {
  double wiener = 0.0;
  double balaban = std::numeric_limits<double>::quiet_NaN();
};

inline PathIndices path_indices_connected(const descfm::Molecule& m) {
  std::vector<int> ids;
  const auto d = floyd_warshall(m, &ids);
  const std::size_t n = ids.size();
  PathIndices out;
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      s[i] += d[i][j];
      if (i < j) out.wiener += d[i][j];
    }
  int edges = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (d[i][j] == 1) {
        ++edges;
        acc += 1.0 / std::sqrt(s[i] * s[j]);
      }
  if (edges > 0) {
    const int gamma = edges - static_cast<int>(n) + 1;
    out.balaban = edges / static_cast<double>(gamma + 1) * acc;
  }
  return out;
}

// Counts distinct atom sets over all injective maps of the query atoms onto
// molecule atoms that satisfy every atom and bond constraint.
inline int enumerate_matches(const descfm::Molecule& m, const descfm::QueryGraph& q) {
  const int k = q.num_atoms();
  const int n = m.num_atoms();
  std::set<std::vector<int>> sets;
  std::vector<int> map(static_cast<std::size_t>(k), -1);
  auto bond_between = [&](int a, int b) -> const descfm::Bond* {
    for (const auto& bond : m.bonds())
      if ((bond.begin == a && bond.end == b) || (bond.begin == b && bond.end == a)) return &bond;
    return nullptr;
  };
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == k) {
      for (const auto& qb : q.bonds()) {
        const auto* b = bond_between(map[qb.begin], map[qb.end]);
        if (!b || (qb.order && b->order != *qb.order)) return;
      }
      for (int i = 0; i < k; ++i)
        if (!q.atoms()[i].matches(m, map[i])) return;
      auto s = map;
      std::sort(s.begin(), s.end());
      sets.insert(s);
      return;
    }
    for (int a = 0; a < n; ++a) {
      if (std::find(map.begin(), map.begin() + depth, a) != map.begin() + depth) continue;
      map[depth] = a;
      self(self, depth + 1);
    }
    map[depth] = -1;
  };
  rec(rec, 0);
  return static_cast<int>(sets.size());
}

inline std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Random strings from the supported grammar; many fail valence checks, callers
// keep the ones that parse.
inline std::string random_smiles(std::mt19937_64& rng) {
  static const char* atoms[] = {"C", "C", "C", "N", "O", "S", "Cl", "F", "c", "n", "[NH4+]", "[O-]", "Br", "P"};
  static const char* bonds[] = {"", "", "", "", "=", "#", "-"};
  std::uniform_int_distribution<int> pick_atom(0, 13), pick_bond(0, 6), coin(0, 9), len(1, 14);
  std::string s;
  int open_branches = 0;
  std::vector<int> open_rings;
  int next_ring = 1;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      if (coin(rng) == 0 && open_branches < 3 && i < n - 1) {
        s += '(';
        ++open_branches;
      } else if (coin(rng) == 1 && open_branches > 0) {
        s += ')';
        --open_branches;
      }
      s += bonds[pick_bond(rng)];
    }
    s += atoms[pick_atom(rng)];
    if (coin(rng) < 2 && next_ring < 10) {
      if (!open_rings.empty() && coin(rng) < 6) {
        s += std::to_string(open_rings.back());
        open_rings.pop_back();
      } else {
        open_rings.push_back(next_ring);
        s += std::to_string(next_ring++);
      }
    }
    if (coin(rng) == 9 && i < n - 1 && open_branches == 0) {
      s += '.';
      s += atoms[pick_atom(rng)];
    }
  }
  while (open_branches-- > 0) s += ')';
  return s;
}

}  // namespace oracle
