#include "descfm/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>

#include "binary_io.hpp"
#include "descfm/elements.hpp"

namespace descfm {
namespace {

// Sorting the terms first makes the result independent of atom order.
double ordered_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

using K = DescriptorKind;

constexpr std::array<DescriptorSpec, kNumDescriptors> kSpecs{{
    {"nHeavy", K::Counting, "summed over fragments"},
    {"nC", K::Counting, "summed over fragments"},
    {"nN", K::Counting, "summed over fragments"},
    {"nO", K::Counting, "summed over fragments"},
    {"nHalogen", K::Counting, "F, Cl, Br, I; summed over fragments"},
    {"nHetero", K::Counting, "heavy atoms other than carbon"},
    {"nBondsHeavy", K::Counting, "bonds between heavy atoms"},
    {"nAromaticAtoms", K::Counting, "aromatic heavy atoms"},
    {"nRings", K::Counting, "cyclomatic number of the whole graph"},
    {"nRotatableBonds", K::Counting, "non-ring single bonds between heavy atoms of heavy degree >= 2"},
    {"nHBD", K::Counting, "N or O bearing at least one hydrogen"},
    {"nHBA", K::Counting, "N and O atoms"},
    {"nCarbonyl", K::Counting, "C=O pattern matches"},
    {"nHydroxyl", K::Counting, "O(H)-C pattern matches"},
    {"nCarboxyl", K::Counting, "C(=O)O(H) pattern matches"},
    {"nAmine", K::Counting, "saturated neutral aliphatic N"},
    {"nNitro", K::Counting, "N(=O)O pattern matches"},
    {"nEster", K::Counting, "C(=O)OC pattern matches"},
    {"MW", K::Aggregation, "average masses, hydrogens included"},
    {"McGowanVolume", K::Aggregation, "cm^3/mol/100; invalid if an element has no tabulated volume"},
    {"RandicChi", K::Aggregation, "heavy-atom graph, summed over fragments"},
    {"ZagrebM1", K::Aggregation, "heavy-atom graph, summed over fragments"},
    {"ZagrebM2", K::Aggregation, "heavy-atom graph, summed over fragments"},
    {"WienerIndex", K::Complexity, "largest fragment; invalid without heavy atoms"},
    {"BalabanJ", K::Complexity, "largest fragment; invalid below two heavy atoms"},
    {"EccentricConnectivity", K::Complexity, "largest fragment; invalid without heavy atoms"},
}};

enum Col : std::size_t {
  kHeavy, kC, kN, kO, kHalogen, kHetero, kBondsHeavy, kAromatic, kRings, kRotatable, kHBD, kHBA,
  kCarbonyl, kHydroxyl, kCarboxyl, kAmine, kNitro, kEster, kMW, kMcGowan, kRandic, kZagreb1,
  kZagreb2, kWiener, kBalaban, kEccentric,
};

constexpr double kMcGowanBondDecrement = 6.56;

bool is_heavy(const Atom& a) { return a.atomic_number != 1; }

// Topological indices of one heavy-atom fragment.
struct FragmentTopology {
  int atoms = 0;
  int edges = 0;
  double wiener = 0.0;
  std::optional<double> balaban;
  double eccentric = 0.0;

  auto key() const {
    return std::make_tuple(atoms, edges, wiener, balaban.value_or(-1.0), eccentric);
  }
};

std::optional<FragmentTopology> largest_fragment(const Molecule& m, bool* multi_fragment) {
  const int n = m.num_atoms();
  std::vector<int> heavy_index(static_cast<std::size_t>(n), -1);
  std::vector<int> heavy_atoms;
  for (int i = 0; i < n; ++i) {
    if (is_heavy(m.atom(i))) {
      heavy_index[i] = static_cast<int>(heavy_atoms.size());
      heavy_atoms.push_back(i);
    }
  }
  if (heavy_atoms.empty()) return std::nullopt;
  const int h = static_cast<int>(heavy_atoms.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(h));
  for (const Bond& b : m.bonds()) {
    const int u = heavy_index[b.begin];
    const int v = heavy_index[b.end];
    if (u >= 0 && v >= 0) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
  }

  // BFS from every source; distances to unreachable atoms stay -1.
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(h), std::vector<int>(static_cast<std::size_t>(h), -1));
  for (int s = 0; s < h; ++s) {
    auto& d = dist[s];
    std::queue<int> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (int b : adj[a]) {
        if (d[b] < 0) {
          d[b] = d[a] + 1;
          q.push(b);
        }
      }
    }
  }

  std::vector<int> comp(static_cast<std::size_t>(h), -1);
  int n_comp = 0;
  for (int s = 0; s < h; ++s) {
    if (comp[s] >= 0) continue;
    for (int t = 0; t < h; ++t) {
      if (dist[s][t] >= 0) comp[t] = n_comp;
    }
    ++n_comp;
  }
  if (multi_fragment) *multi_fragment = n_comp > 1;

  std::optional<FragmentTopology> best;
  for (int c = 0; c < n_comp; ++c) {
    FragmentTopology f;
    std::vector<double> row_sum(static_cast<std::size_t>(h), 0.0);
    for (int s = 0; s < h; ++s) {
      if (comp[s] != c) continue;
      ++f.atoms;
      int ecc = 0;
      long long total = 0;
      for (int t = 0; t < h; ++t) {
        if (dist[s][t] > 0) {
          total += dist[s][t];
          ecc = std::max(ecc, dist[s][t]);
        }
      }
      row_sum[s] = static_cast<double>(total);
      f.wiener += static_cast<double>(total);
      f.eccentric += static_cast<double>(ecc) * static_cast<double>(adj[s].size());
      f.edges += static_cast<int>(adj[s].size());
    }
    f.edges /= 2;
    f.wiener /= 2.0;
    if (f.edges > 0) {
      std::vector<double> terms;
      for (int s = 0; s < h; ++s) {
        if (comp[s] != c) continue;
        for (int t : adj[s]) {
          if (t > s) terms.push_back(1.0 / std::sqrt(row_sum[s] * row_sum[t]));
        }
      }
      const double sum = ordered_sum(std::move(terms));
      const int cyclomatic = f.edges - f.atoms + 1;
      f.balaban = static_cast<double>(f.edges) / (cyclomatic + 1) * sum;
    }
    if (!best || f.key() > best->key()) best = f;
  }
  return best;
}

double atom_mass(const Atom& a) {
  if (a.isotope) return static_cast<double>(*a.isotope);
  const ElementInfo* e = find_element(a.atomic_number);
  return e ? e->average_mass : 0.0;
}

QueryAtom element_atom(int z) {
  QueryAtom q;
  q.atomic_number = z;
  return q;
}

}  // namespace

std::span<const DescriptorSpec> descriptor_specs() { return kSpecs; }

std::vector<std::string> descriptor_names() {
  std::vector<std::string> names;
  names.reserve(kSpecs.size());
  for (const auto& s : kSpecs) names.emplace_back(s.name);
  return names;
}

const QueryGraph& carbonyl_pattern() {
  static const QueryGraph q({element_atom(6), element_atom(8)}, {{0, 1, BondOrder::Double}});
  return q;
}

const QueryGraph& hydroxyl_pattern() {
  static const QueryGraph q = [] {
    QueryAtom o = element_atom(8);
    o.hydrogen_count = 1;
    o.heavy_degree = 1;
    return QueryGraph({o, element_atom(6)}, {{0, 1, BondOrder::Single}});
  }();
  return q;
}

const QueryGraph& carboxyl_pattern() {
  static const QueryGraph q = [] {
    QueryAtom oh = element_atom(8);
    oh.hydrogen_count = 1;
    return QueryGraph({element_atom(6), element_atom(8), oh},
                      {{0, 1, BondOrder::Double}, {0, 2, BondOrder::Single}});
  }();
  return q;
}

const QueryGraph& amine_pattern() {
  static const QueryGraph q = [] {
    QueryAtom n = element_atom(7);
    n.aromatic = false;
    n.formal_charge = 0;
    n.unsaturated = false;
    return QueryGraph({n}, {});
  }();
  return q;
}

const QueryGraph& nitro_pattern() {
  static const QueryGraph q({element_atom(7), element_atom(8), element_atom(8)},
                            {{0, 1, BondOrder::Double}, {0, 2, std::nullopt}});
  return q;
}

const QueryGraph& ester_pattern() {
  static const QueryGraph q = [] {
    QueryAtom o = element_atom(8);
    o.hydrogen_count = 0;
    return QueryGraph({element_atom(6), element_atom(8), o, element_atom(6)},
                      {{0, 1, BondOrder::Double}, {0, 2, BondOrder::Single}, {2, 3, BondOrder::Single}});
  }();
  return q;
}

double wiener_index(const Molecule& m) {
  const auto f = largest_fragment(m, nullptr);
  return f ? f->wiener : 0.0;
}

std::optional<double> balaban_j(const Molecule& m) {
  const auto f = largest_fragment(m, nullptr);
  return f ? f->balaban : std::nullopt;
}

std::optional<double> mcgowan_volume(const Molecule& m) {
  const ElementInfo* hydrogen = find_element(1);
  std::vector<double> terms;
  long long bonds = m.num_bonds();
  for (const Atom& a : m.atoms()) {
    const ElementInfo* e = find_element(a.atomic_number);
    if (!e || !e->mcgowan_volume) return std::nullopt;
    terms.push_back(*e->mcgowan_volume + a.total_h() * *hydrogen->mcgowan_volume);
    bonds += a.total_h();
  }
  const double volume = ordered_sum(std::move(terms));
  return (volume - kMcGowanBondDecrement * static_cast<double>(bonds)) / 100.0;
}

DescriptorVector compute_descriptors(const Molecule& m) {
  DescriptorVector out;
  out.valid.fill(true);
  auto& v = out.values;

  const int n = m.num_atoms();
  std::vector<int> heavy_degree(static_cast<std::size_t>(n), 0);
  std::vector<double> masses, randic;
  for (int i = 0; i < n; ++i) {
    const Atom& a = m.atom(i);
    masses.push_back(atom_mass(a) + a.total_h() * find_element(1)->average_mass);
    if (!is_heavy(a)) continue;
    heavy_degree[i] = m.heavy_degree(i);
    v[kHeavy] += 1;
    switch (a.atomic_number) {
      case 6: v[kC] += 1; break;
      case 7: v[kN] += 1; break;
      case 8: v[kO] += 1; break;
      case 9:
      case 17:
      case 35:
      case 53: v[kHalogen] += 1; break;
      default: break;
    }
    if (a.atomic_number != 6) v[kHetero] += 1;
    if (a.aromatic) v[kAromatic] += 1;
    if (a.atomic_number == 7 || a.atomic_number == 8) {
      v[kHBA] += 1;
      if (m.hydrogen_count(i) > 0) v[kHBD] += 1;
    }
    v[kZagreb1] += static_cast<double>(heavy_degree[i]) * heavy_degree[i];
  }
  v[kMW] = ordered_sum(std::move(masses));

  for (const Bond& b : m.bonds()) {
    if (!is_heavy(m.atom(b.begin)) || !is_heavy(m.atom(b.end))) continue;
    v[kBondsHeavy] += 1;
    const double du = heavy_degree[b.begin];
    const double dv = heavy_degree[b.end];
    randic.push_back(1.0 / std::sqrt(du * dv));
    v[kZagreb2] += du * dv;
    if (b.order == BondOrder::Single && !b.in_ring && du >= 2 && dv >= 2) v[kRotatable] += 1;
  }
  v[kRandic] = ordered_sum(std::move(randic));
  v[kRings] = m.num_rings();

  v[kCarbonyl] = count_subgraph_matches(m, carbonyl_pattern());
  v[kHydroxyl] = count_subgraph_matches(m, hydroxyl_pattern());
  v[kCarboxyl] = count_subgraph_matches(m, carboxyl_pattern());
  v[kAmine] = count_subgraph_matches(m, amine_pattern());
  v[kNitro] = count_subgraph_matches(m, nitro_pattern());
  v[kEster] = count_subgraph_matches(m, ester_pattern());

  if (const auto vol = mcgowan_volume(m)) {
    v[kMcGowan] = *vol;
  } else {
    out.valid[kMcGowan] = false;
  }

  const auto frag = largest_fragment(m, &out.largest_fragment_only);
  if (frag) {
    v[kWiener] = frag->wiener;
    v[kEccentric] = frag->eccentric;
    if (frag->balaban) {
      v[kBalaban] = *frag->balaban;
    } else {
      out.valid[kBalaban] = false;
    }
  } else {
    out.valid[kWiener] = out.valid[kBalaban] = out.valid[kEccentric] = false;
  }

  for (std::size_t c = 0; c < kNumDescriptors; ++c) {
    if (!out.valid[c]) v[c] = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// ---------------------------------------------------------------------------

DescriptorMatrix DescriptorMatrix::empty(std::vector<std::string> names) {
  DescriptorMatrix d;
  d.names = std::move(names);
  return d;
}

void DescriptorMatrix::append_row(std::string id, std::span<const double> row, std::span<const bool> row_valid) {
  if (row.size() != cols() || row_valid.size() != cols()) throw InputError("descriptor row width mismatch");
  row_ids.push_back(std::move(id));
  for (std::size_t c = 0; c < cols(); ++c) {
    values.push_back(row_valid[c] ? row[c] : std::numeric_limits<double>::quiet_NaN());
    mask.push_back(row_valid[c] ? 1 : 0);
  }
  ++rows;
}

DescriptorMatrix select_rows(const DescriptorMatrix& d, std::span<const std::size_t> rows) {
  DescriptorMatrix out = DescriptorMatrix::empty(d.names);
  const std::size_t c = d.cols();
  for (std::size_t r : rows) {
    if (r >= d.rows) throw std::out_of_range("select_rows: row " + std::to_string(r) + " out of range");
    out.row_ids.push_back(r < d.row_ids.size() ? d.row_ids[r] : std::string());
    out.values.insert(out.values.end(), d.values.begin() + static_cast<std::ptrdiff_t>(r * c),
                      d.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * c));
    out.mask.insert(out.mask.end(), d.mask.begin() + static_cast<std::ptrdiff_t>(r * c),
                    d.mask.begin() + static_cast<std::ptrdiff_t>((r + 1) * c));
    ++out.rows;
  }
  return out;
}

DescriptorMatrix compute_descriptor_matrix(std::span<const Molecule> molecules, std::span<const std::string> ids) {
  if (!ids.empty() && ids.size() != molecules.size()) throw InputError("id count does not match molecule count");
  auto d = DescriptorMatrix::empty(descriptor_names());
  for (std::size_t i = 0; i < molecules.size(); ++i) {
    const auto dv = compute_descriptors(molecules[i]);
    d.append_row(ids.empty() ? std::to_string(i) : ids[i], dv.values, dv.valid);
  }
  return d;
}

ScalerStats fit_scaler(const DescriptorMatrix& d, double clip_sigmas) {
  if (d.rows < 2) throw InputError("fit_scaler needs at least two rows");
  const std::size_t cols = d.cols();
  ScalerStats s;
  s.names = d.names;
  s.clip_sigmas = clip_sigmas;
  s.mean.assign(cols, 0.0);
  s.std.assign(cols, 0.0);
  s.constant.assign(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < d.rows; ++r) {
      if (d.valid(r, c)) {
        sum += d.at(r, c);
        ++count;
      }
    }
    if (count == 0) {
      s.constant[c] = 1;
      continue;
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t r = 0; r < d.rows; ++r) {
      if (d.valid(r, c)) ss += (d.at(r, c) - mean) * (d.at(r, c) - mean);
    }
    s.mean[c] = mean;
    s.std[c] = std::sqrt(ss / static_cast<double>(count));
    if (s.std[c] == 0.0) s.constant[c] = 1;
  }
  return s;
}

DescriptorMatrix apply_scaler(const DescriptorMatrix& d, const ScalerStats& s) {
  if (d.names != s.names) throw InputError("scaler columns do not match descriptor matrix columns");
  DescriptorMatrix out = d;
  const std::size_t cols = d.cols();
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t k = r * cols + c;
      if (s.constant[c] || !d.mask[k]) {
        out.mask[k] = 0;
        out.values[k] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double z = (d.values[k] - s.mean[c]) / s.std[c];
      out.values[k] = std::clamp(z, -s.clip_sigmas, s.clip_sigmas);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_chmd(std::ostream& out, const DescriptorMatrix& d) {
  out.write("CHMD", 4);
  detail::write_pod<std::uint32_t>(out, kChmdVersion);
  detail::write_pod<std::uint64_t>(out, d.rows);
  detail::write_pod<std::uint64_t>(out, d.cols());
  for (const auto& name : d.names) detail::write_string(out, name);
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    const float f = d.mask[k] ? static_cast<float>(d.values[k]) : std::numeric_limits<float>::quiet_NaN();
    detail::write_pod<float>(out, f);
  }
  if (!out) throw InputError("failed writing CHMD stream");
}

DescriptorMatrix read_chmd(std::istream& in) {
  detail::expect_magic(in, "CHMD");
  const auto version = detail::read_pod<std::uint32_t>(in, "CHMD version");
  if (version != kChmdVersion) throw InputError("unsupported CHMD version " + std::to_string(version));
  const auto rows = detail::read_pod<std::uint64_t>(in, "CHMD row count");
  const auto cols = detail::read_pod<std::uint64_t>(in, "CHMD column count");
  if (cols > (1u << 20)) throw InputError("implausible CHMD column count");
  DescriptorMatrix d;
  for (std::uint64_t c = 0; c < cols; ++c) d.names.push_back(detail::read_string(in, "CHMD column name"));
  d.rows = rows;
  d.values.reserve(rows * cols);
  d.mask.reserve(rows * cols);
  for (std::uint64_t k = 0; k < rows * cols; ++k) {
    const float f = detail::read_pod<float>(in, "CHMD values");
    d.mask.push_back(std::isnan(f) ? 0 : 1);
    d.values.push_back(static_cast<double>(f));
  }
  for (std::uint64_t r = 0; r < rows; ++r) d.row_ids.push_back(std::to_string(r));
  return d;
}

void save_chmd(const std::string& path, const DescriptorMatrix& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  write_chmd(out, d);
}

DescriptorMatrix load_chmd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return read_chmd(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_descriptor_csv(std::ostream& out, const DescriptorMatrix& d) {
  out << "id";
  for (const auto& n : d.names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < d.rows; ++r) {
    out << (r < d.row_ids.size() ? d.row_ids[r] : std::to_string(r));
    for (std::size_t c = 0; c < d.cols(); ++c) {
      out << ',';
      if (d.valid(r, c)) {
        std::snprintf(buf, sizeof(buf), "%.10g", d.at(r, c));
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace descfm
