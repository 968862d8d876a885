#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "descfm/molgraph.hpp"

namespace descfm {

enum class DescriptorKind { Counting, Aggregation, Complexity };

struct DescriptorSpec {
  std::string_view name;
  DescriptorKind kind;
  std::string_view domain_note;
};

inline constexpr std::size_t kNumDescriptors = 26;
// Bumped whenever the canonical descriptor list or any definition changes.
inline constexpr std::uint32_t kDescriptorSetVersion = 1;

// Canonical, fixed order.
std::span<const DescriptorSpec> descriptor_specs();
std::vector<std::string> descriptor_names();

struct DescriptorVector {
  std::array<double, kNumDescriptors> values{};
  std::array<bool, kNumDescriptors> valid{};
  // Path-based descriptors were computed on the largest fragment only.
  bool largest_fragment_only = false;
};

DescriptorVector compute_descriptors(const Molecule& m);

// Topological indices on the heavy-atom graph. For multi-fragment molecules
// the largest fragment is used (ties broken by bond count, then by the index
// value itself so the choice is label-independent).
double wiener_index(const Molecule& m);
// Sum of McGowan atomic volumes minus 6.56 per bond (hydrogen bonds included),
// in cm^3/mol/100. nullopt when an atom has no tabulated volume.
std::optional<double> mcgowan_volume(const Molecule& m);
// nullopt for fewer than two heavy atoms in the chosen fragment.
std::optional<double> balaban_j(const Molecule& m);

// Shipped functional-group patterns used by the substructure counts.
const QueryGraph& carbonyl_pattern();
const QueryGraph& hydroxyl_pattern();
const QueryGraph& carboxyl_pattern();
const QueryGraph& amine_pattern();
const QueryGraph& nitro_pattern();
const QueryGraph& ester_pattern();

// Dense rows of descriptor values. Invalid cells hold quiet NaN and a false
// mask entry; they never enter statistics.
struct DescriptorMatrix {
  std::vector<std::string> names;
  std::vector<std::string> row_ids;
  std::size_t rows = 0;
  std::vector<double> values;      // rows x cols, row-major
  std::vector<std::uint8_t> mask;  // 1 = valid

  std::size_t cols() const { return names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  bool valid(std::size_t r, std::size_t c) const { return mask[r * cols() + c] != 0; }

  static DescriptorMatrix empty(std::vector<std::string> names);
  void append_row(std::string id, std::span<const double> row, std::span<const bool> row_valid);
};

// Copy of the given rows, in the given order.
DescriptorMatrix select_rows(const DescriptorMatrix& d, std::span<const std::size_t> rows);

DescriptorMatrix compute_descriptor_matrix(std::span<const Molecule> molecules,
                                           std::span<const std::string> ids = {});

struct ScalerStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::uint8_t> constant;  // std == 0 or no valid cells
  double clip_sigmas = 6.0;
};

// Per-column population mean/std over valid cells. Throws InputError for fewer
// than two rows.
ScalerStats fit_scaler(const DescriptorMatrix& d, double clip_sigmas = 6.0);

// z = (x - mean) / std clipped to +-clip_sigmas; constant columns become
// invalid everywhere. Throws InputError on a column-name mismatch.
DescriptorMatrix apply_scaler(const DescriptorMatrix& d, const ScalerStats& s);

// Binary CHMD file: "CHMD", u32 version, u64 rows, u64 cols, u32-length-prefixed
// column names, then row-major little-endian float32 with NaN for invalid.
inline constexpr std::uint32_t kChmdVersion = 1;
void write_chmd(std::ostream& out, const DescriptorMatrix& d);
DescriptorMatrix read_chmd(std::istream& in);
void save_chmd(const std::string& path, const DescriptorMatrix& d);
DescriptorMatrix load_chmd(const std::string& path);

// CSV with header `id,<names...>`, empty cells for invalid values.
void write_descriptor_csv(std::ostream& out, const DescriptorMatrix& d);

}  // namespace descfm
