#include "descfm/dmpnn.hpp"

#include <algorithm>
#include <stdexcept>

namespace descfm {

namespace {

constexpr int kElementSlots[] = {1, 5, 6, 7, 8, 9, 15, 16, 17, 35, 53};  // H B C N O F P S Cl Br I
constexpr std::size_t kElementBlock = 12;
constexpr std::size_t kDegreeOffset = kElementBlock;
constexpr std::size_t kChargeOffset = kDegreeOffset + 6;
constexpr std::size_t kAromaticOffset = kChargeOffset + 5;
constexpr std::size_t kHydrogenOffset = kAromaticOffset + 1;
static_assert(kHydrogenOffset + 5 == kAtomFeatureWidth);

std::size_t element_slot(int z) {
  for (std::size_t i = 0; i < std::size(kElementSlots); ++i)
    if (kElementSlots[i] == z) return i;
  return kElementBlock - 1;
}

// Shared by the trainable and inference paths; `bind` turns a parameter into a
// tape variable.
template <typename Model, typename Bind>
MpnnOutputs run(Tape& tape, const BatchGraph& b, Model& model, Bind&& bind) {
  const MpnnConfig& cfg = model.config;
  if (b.atoms.cols() != kAtomFeatureWidth || b.edges.cols() != kBondFeatureWidth)
    throw ShapeError("forward: batch feature widths do not match the featurizer");
  if (model.w_i.value.rows() != kAtomFeatureWidth + kBondFeatureWidth || model.w_i.value.cols() != cfg.hidden_size)
    throw ShapeError("forward: W_i shape " + model.w_i.value.shape_string() + " does not match the config");
  const std::size_t n_atoms = b.num_atoms();

  // copied so the batch may go out of scope before the tape
  Var x = tape.constant(b.atoms);
  Var e = tape.constant(b.edges);
  Var w_i = bind(model.w_i);
  Var w_h = bind(model.w_h);

  Var h0 = relu(matmul(concat(gather_rows(x, b.edge_source), e), w_i));
  Var h = h0;
  for (std::size_t t = 1; t < cfg.depth; ++t) {
    // sum of states entering the source atom, minus the reverse edge
    Var incoming = scatter_add_rows(h, b.edge_target, n_atoms);
    Var message = sub(gather_rows(incoming, b.edge_source), gather_rows(h, b.edge_reverse));
    h = relu(add(h0, matmul(message, w_h)));
  }
  Var incoming = scatter_add_rows(h, b.edge_target, n_atoms);
  Var atom_hidden = relu(linear(concat(x, incoming), bind(model.w_o), bind(model.b_o)));

  std::vector<double> inv_count(b.num_molecules);
  for (std::size_t m = 0; m < b.num_molecules; ++m)
    inv_count[m] = 1.0 / static_cast<double>(b.atom_offset[m + 1] - b.atom_offset[m]);
  Var embedding = row_scale(scatter_add_rows(atom_hidden, b.atom_molecule, b.num_molecules), inv_count);
  return {h, atom_hidden, embedding, Var{}};
}

}  // namespace

MolFeatures featurize(const Molecule& m) {
  if (m.num_atoms() == 0) throw InputError("featurize: molecule has no atoms");
  MolFeatures f;
  f.atoms = Tensor(static_cast<std::size_t>(m.num_atoms()), kAtomFeatureWidth);
  for (int i = 0; i < m.num_atoms(); ++i) {
    const Atom& a = m.atom(i);
    const auto r = static_cast<std::size_t>(i);
    f.atoms(r, element_slot(a.atomic_number)) = 1.0;
    f.atoms(r, kDegreeOffset + static_cast<std::size_t>(std::min(m.degree(i), 5))) = 1.0;
    f.atoms(r, kChargeOffset + static_cast<std::size_t>(std::clamp(a.formal_charge, -2, 2) + 2)) = 1.0;
    f.atoms(r, kAromaticOffset) = a.aromatic ? 1.0 : 0.0;
    f.atoms(r, kHydrogenOffset + static_cast<std::size_t>(std::min(m.hydrogen_count(i), 4))) = 1.0;
  }
  const auto n_edges = static_cast<std::size_t>(2 * m.num_bonds());
  f.edges = Tensor(n_edges, kBondFeatureWidth);
  f.edge_source.resize(n_edges);
  f.edge_target.resize(n_edges);
  f.edge_reverse.resize(n_edges);
  for (int bi = 0; bi < m.num_bonds(); ++bi) {
    const Bond& bond = m.bond(bi);
    for (int dir = 0; dir < 2; ++dir) {
      const auto e = static_cast<std::size_t>(2 * bi + dir);
      f.edge_source[e] = dir == 0 ? bond.begin : bond.end;
      f.edge_target[e] = dir == 0 ? bond.end : bond.begin;
      f.edge_reverse[e] = static_cast<int>(e ^ 1U);
      f.edges(e, static_cast<std::size_t>(bond.order)) = 1.0;
      f.edges(e, 4) = bond.in_ring ? 1.0 : 0.0;
    }
  }
  return f;
}

BatchGraph make_batch(std::span<const MolFeatures* const> mols) {
  BatchGraph b;
  std::size_t n_atoms = 0, n_edges = 0;
  for (const MolFeatures* f : mols) {
    n_atoms += f->num_atoms();
    n_edges += f->num_edges();
  }
  b.atoms = Tensor(n_atoms, kAtomFeatureWidth);
  b.edges = Tensor(n_edges, kBondFeatureWidth);
  b.edge_source.reserve(n_edges);
  b.edge_target.reserve(n_edges);
  b.edge_reverse.reserve(n_edges);
  b.atom_molecule.reserve(n_atoms);
  b.num_molecules = mols.size();
  std::size_t atom_base = 0, edge_base = 0;
  for (std::size_t m = 0; m < mols.size(); ++m) {
    const MolFeatures& f = *mols[m];
    b.atom_offset.push_back(atom_base);
    std::copy(f.atoms.values().begin(), f.atoms.values().end(), b.atoms.data() + atom_base * kAtomFeatureWidth);
    std::copy(f.edges.values().begin(), f.edges.values().end(), b.edges.data() + edge_base * kBondFeatureWidth);
    for (std::size_t e = 0; e < f.num_edges(); ++e) {
      b.edge_source.push_back(f.edge_source[e] + static_cast<int>(atom_base));
      b.edge_target.push_back(f.edge_target[e] + static_cast<int>(atom_base));
      b.edge_reverse.push_back(f.edge_reverse[e] + static_cast<int>(edge_base));
    }
    b.atom_molecule.insert(b.atom_molecule.end(), f.num_atoms(), static_cast<int>(m));
    atom_base += f.num_atoms();
    edge_base += f.num_edges();
  }
  b.atom_offset.push_back(atom_base);
  return b;
}

BatchGraph make_batch(std::span<const MolFeatures> mols) {
  std::vector<const MolFeatures*> ptrs;
  ptrs.reserve(mols.size());
  for (const MolFeatures& f : mols) ptrs.push_back(&f);
  return make_batch(std::span<const MolFeatures* const>(ptrs));
}

void MpnnConfig::validate() const {
  if (hidden_size == 0 || depth == 0 || ffn_layers == 0 || output_dim == 0)
    throw std::invalid_argument("MpnnConfig: hidden_size, depth, ffn_layers and output_dim must be positive");
}

MpnnModel MpnnModel::init(const MpnnConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  MpnnModel model;
  model.config = cfg;
  std::mt19937_64 rng(seed);
  const std::size_t h = cfg.hidden_size;
  model.w_i = Parameter("mpn.W_i", xavier_uniform(kAtomFeatureWidth + kBondFeatureWidth, h, rng));
  model.w_h = Parameter("mpn.W_h", xavier_uniform(h, h, rng));
  model.w_o = Parameter("mpn.W_o", xavier_uniform(kAtomFeatureWidth + h, h, rng));
  model.b_o = Parameter("mpn.b_o", Tensor(1, h));
  model.head = FeedForward::init(h, cfg.resolved_ffn_hidden(), cfg.ffn_layers, cfg.output_dim, rng, "ffn");
  return model;
}

void MpnnModel::reinit_head(std::size_t output_dim, std::uint64_t seed) {
  config.output_dim = output_dim;
  config.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x68656164U};
  std::mt19937_64 rng(seq);
  head = FeedForward::init(config.hidden_size, config.resolved_ffn_hidden(), config.ffn_layers, output_dim, rng, "ffn");
}

std::vector<Parameter*> MpnnModel::encoder_params() { return {&w_i, &w_h, &w_o, &b_o}; }

std::vector<Parameter*> MpnnModel::all_params() {
  auto out = encoder_params();
  for (Parameter* p : head.params()) out.push_back(p);
  return out;
}

MpnnOutputs forward(Tape& tape, const BatchGraph& b, MpnnModel& model, bool freeze_encoder) {
  MpnnOutputs out = freeze_encoder
                        ? run(tape, b, model, [&](Parameter& p) { return tape.borrow(p.value); })
                        : run(tape, b, model, [&](Parameter& p) { return tape.param(p); });
  out.output = model.head.forward(tape, out.embedding);
  return out;
}

MpnnOutputs forward_const(Tape& tape, const BatchGraph& b, const MpnnModel& model) {
  MpnnOutputs out = run(tape, b, model, [&](const Parameter& p) { return tape.borrow(p.value); });
  out.output = model.head.forward_const(tape, out.embedding);
  return out;
}

std::vector<double> fingerprint(const Molecule& m, const MpnnModel& model) {
  const MolFeatures f = featurize(m);
  const Tensor t = fingerprints(std::span<const MolFeatures>(&f, 1), model);
  return {t.values().begin(), t.values().end()};
}

Tensor fingerprints(std::span<const MolFeatures> mols, const MpnnModel& model, std::size_t batch_size) {
  const std::size_t h = model.config.hidden_size;
  Tensor out(mols.size(), h);
  for (std::size_t start = 0; start < mols.size(); start += batch_size) {
    const std::size_t end = std::min(mols.size(), start + batch_size);
    const BatchGraph b = make_batch(mols.subspan(start, end - start));
    Tape tape;
    const Tensor& emb = run(tape, b, model, [&](const Parameter& p) { return tape.borrow(p.value); }).embedding.value();
    std::copy(emb.values().begin(), emb.values().end(), out.data() + start * h);
  }
  return out;
}

}  // namespace descfm
