#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "descfm/molgraph.hpp"
#include "descfm/tensor.hpp"

namespace descfm {

// ---------------------------------------------------------------------------
// Morgan (circular) fingerprints

// Initial atom invariant: element, heavy degree, charge, total H, aromatic, ring.
std::uint64_t morgan_atom_invariant(const Molecule& m, int atom);

// Per-atom environment identifiers for rounds 0..radius (round-major).
// Hydrogen atoms carry no identifiers.
std::vector<std::vector<std::uint64_t>> morgan_identifiers(const Molecule& m, int radius = 2);

// Counts of identifiers folded into `width` positions by modulo.
std::vector<std::uint32_t> morgan_fingerprint(const Molecule& m, int radius = 2, std::size_t width = 2048);
std::vector<double> morgan_bits(const Molecule& m, int radius = 2, std::size_t width = 2048);

// ---------------------------------------------------------------------------
// Series sorting

// Tie-corrected rank correlation; nullopt when either input is constant.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

double cosine_distance(std::span<const double> a, std::span<const double> b);

struct SortResult {
  std::vector<std::size_t> order;  // member indices, most similar first
  std::vector<double> distance;    // per member, +inf when flagged
  std::vector<bool> zero_norm;
  std::optional<double> tau;  // versus the reference (input) order
};

// members are given in reference order. Throws InputError with fewer than two
// members, mismatched widths or a zero-norm lead.
SortResult cosine_sort(std::span<const double> lead, const std::vector<std::vector<double>>& members);

struct SeriesSpec {
  std::string label;
  std::string lead;
  std::vector<std::string> members;
};

// JSON list of {"lead": smiles, "members": [smiles...], "label"?: string}.
std::vector<SeriesSpec> read_series_json(const std::string& path);

using FingerprintFn = std::function<std::vector<double>(const Molecule&)>;

SortResult sort_series(const SeriesSpec& s, const FingerprintFn& fp);

// ---------------------------------------------------------------------------
// Exact t-SNE

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t iters = 1000;
  double lr = 200.0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  std::size_t momentum_switch = 250;
  bool pca_init = true;
  std::uint64_t seed = 0;

  void validate(std::size_t n) const;
};

struct Affinities {
  Tensor p;                          // n x n, symmetric, sums to 1
  std::vector<double> perplexity;    // achieved per row
  std::vector<std::size_t> iterations;
};

// Entropy bisection to log2(perplexity) per row, then symmetrization.
Affinities tsne_affinities(const Tensor& x, double perplexity);

// Sum of p log(p / q) over i != j for the embedding y.
double tsne_kl(const Tensor& p, const Tensor& y);

struct TsneResult {
  Tensor y;  // n x 2
  double kl_initial = 0.0;
  double kl_final = 0.0;
  std::vector<double> row_perplexity;
};

TsneResult tsne(const Tensor& x, const TsneConfig& cfg);

// Mean silhouette over points (Euclidean); points alone in their cluster score 0.
double silhouette_score(const Tensor& x, std::span<const int> labels);

}  // namespace descfm
