#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace descfm {

struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  double average_mass;                   // g/mol
  std::optional<double> mcgowan_volume;  // cm^3/mol, Abraham/McGowan contribution
};

// nullptr when the symbol/number is not in the shipped table.
const ElementInfo* find_element(std::string_view symbol);
const ElementInfo* find_element(int atomic_number);

// Default valences for the organic subset, ascending. Empty for other elements.
std::span<const int> standard_valences(int atomic_number);

}  // namespace descfm
