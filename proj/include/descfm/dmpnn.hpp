#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "descfm/molgraph.hpp"
#include "descfm/nn.hpp"
#include "descfm/tensor.hpp"

namespace descfm {

// Atom features: element one-hot over {H,B,C,N,O,F,P,S,Cl,Br,I,other} (12),
// degree 0..5 (6, clipped), formal charge -2..+2 (5, clipped), aromatic (1),
// total hydrogen count 0..4 (5, clipped).
inline constexpr std::size_t kAtomFeatureWidth = 29;
// Bond features: order one-hot {single,double,triple,aromatic} (4), in-ring (1).
inline constexpr std::size_t kBondFeatureWidth = 5;
// Bumped whenever either feature layout changes.
inline constexpr std::uint32_t kFeaturizerVersion = 1;

// Featurized molecule. Bond b yields directed edges 2b (begin -> end) and
// 2b+1 (end -> begin), so the reverse of edge e is e ^ 1.
struct MolFeatures {
  Tensor atoms;  // n_atoms x kAtomFeatureWidth
  Tensor edges;  // n_edges x kBondFeatureWidth
  std::vector<int> edge_source;
  std::vector<int> edge_target;
  std::vector<int> edge_reverse;

  std::size_t num_atoms() const { return atoms.rows(); }
  std::size_t num_edges() const { return edge_source.size(); }
};

// Throws InputError for a molecule without atoms.
MolFeatures featurize(const Molecule& m);

// Several molecules concatenated into one disjoint graph.
struct BatchGraph {
  Tensor atoms;
  Tensor edges;
  std::vector<int> edge_source;
  std::vector<int> edge_target;
  std::vector<int> edge_reverse;
  std::vector<int> atom_molecule;          // owning molecule of each atom
  std::vector<std::size_t> atom_offset;    // first atom of each molecule, plus a final end marker
  std::size_t num_molecules = 0;

  std::size_t num_atoms() const { return atoms.rows(); }
  std::size_t num_edges() const { return edge_source.size(); }
};

BatchGraph make_batch(std::span<const MolFeatures* const> mols);
BatchGraph make_batch(std::span<const MolFeatures> mols);

struct MpnnConfig {
  std::size_t hidden_size = 128;
  std::size_t depth = 3;
  std::size_t ffn_layers = 3;
  std::size_t ffn_hidden = 0;  // 0 = hidden_size
  std::size_t output_dim = 1;

  std::size_t resolved_ffn_hidden() const { return ffn_hidden == 0 ? hidden_size : ffn_hidden; }
  // Throws std::invalid_argument on a non-positive field.
  void validate() const;
  bool operator==(const MpnnConfig&) const = default;
};

struct MpnnModel {
  MpnnConfig config;
  Parameter w_i;  // (atom + bond) x hidden, no bias
  Parameter w_h;  // hidden x hidden, no bias
  Parameter w_o;  // (atom + hidden) x hidden
  Parameter b_o;  // 1 x hidden
  FeedForward head;

  static MpnnModel init(const MpnnConfig& cfg, std::uint64_t seed);
  // Fresh head with a new output size; encoder weights are kept.
  void reinit_head(std::size_t output_dim, std::uint64_t seed);

  std::vector<Parameter*> encoder_params();
  std::vector<Parameter*> head_params() { return head.params(); }
  std::vector<Parameter*> all_params();
};

struct MpnnOutputs {
  Var edge_hidden;  // final directed-edge states, n_edges x hidden
  Var atom_hidden;  // n_atoms x hidden
  Var embedding;    // n_molecules x hidden, mean over atoms
  Var output;       // n_molecules x output_dim
};

// Parameters are registered on the tape and receive gradients. With
// freeze_encoder the encoder weights are borrowed as constants.
MpnnOutputs forward(Tape& tape, const BatchGraph& b, MpnnModel& model, bool freeze_encoder = false);
// Inference: no parameter gradients.
MpnnOutputs forward_const(Tape& tape, const BatchGraph& b, const MpnnModel& model);

// Molecule-level learned representation (hidden_size values per molecule).
std::vector<double> fingerprint(const Molecule& m, const MpnnModel& model);
Tensor fingerprints(std::span<const MolFeatures> mols, const MpnnModel& model, std::size_t batch_size = 64);

}  // namespace descfm
