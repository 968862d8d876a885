#include "descfm/elements.hpp"

#include <array>

namespace descfm {
namespace {

// Average masses follow the RDKit periodic table; McGowan volumes are the
// Abraham & McGowan atomic contributions.
constexpr std::array<ElementInfo, 62> kElements{{
    {"H", 1, 1.008, 8.71},      {"He", 2, 4.003, 6.75},     {"Li", 3, 6.941, 22.23},
    {"Be", 4, 9.012, 20.27},    {"B", 5, 10.812, 18.31},    {"C", 6, 12.011, 16.35},
    {"N", 7, 14.007, 14.39},    {"O", 8, 15.999, 12.43},    {"F", 9, 18.998, 10.47},
    {"Ne", 10, 20.18, 8.51},    {"Na", 11, 22.99, 32.71},   {"Mg", 12, 24.305, 30.75},
    {"Al", 13, 26.982, 28.79},  {"Si", 14, 28.086, 26.83},  {"P", 15, 30.974, 24.87},
    {"S", 16, 32.067, 22.91},   {"Cl", 17, 35.453, 20.95},  {"Ar", 18, 39.948, 18.99},
    {"K", 19, 39.098, 51.89},   {"Ca", 20, 40.078, 50.28},  {"Sc", 21, 44.956, 48.68},
    {"Ti", 22, 47.867, 47.07},  {"V", 23, 50.944, 45.47},   {"Cr", 24, 51.996, 43.86},
    {"Mn", 25, 54.938, 42.26},  {"Fe", 26, 55.845, 40.65},  {"Co", 27, 58.933, 39.05},
    {"Ni", 28, 58.693, 37.44},  {"Cu", 29, 63.546, 35.84},  {"Zn", 30, 65.39, 34.23},
    {"Ga", 31, 69.723, 32.63},  {"Ge", 32, 72.61, 31.02},   {"As", 33, 74.922, 29.42},
    {"Se", 34, 78.96, 27.81},   {"Br", 35, 79.904, 26.21},  {"Kr", 36, 83.8, 24.6},
    {"Rb", 37, 85.468, 60.22},  {"Sr", 38, 87.62, 58.61},   {"Y", 39, 88.906, 57.01},
    {"Zr", 40, 91.224, 55.4},   {"Nb", 41, 92.906, 53.8},   {"Mo", 42, 95.94, 52.19},
    {"Tc", 43, 98.0, 50.59},    {"Ru", 44, 101.07, 48.98},  {"Rh", 45, 102.906, 47.38},
    {"Pd", 46, 106.42, 45.77},  {"Ag", 47, 107.868, 44.17}, {"Cd", 48, 112.412, 42.56},
    {"In", 49, 114.818, 40.96}, {"Sn", 50, 118.711, 39.35}, {"Sb", 51, 121.76, 37.75},
    {"Te", 52, 127.6, 36.14},   {"I", 53, 126.904, 34.54},  {"Xe", 54, 131.29, 32.93},
    {"Cs", 55, 132.905, 77.25}, {"Ba", 56, 137.328, 76.0},  {"Pt", 78, 195.078, 48.45},
    {"Au", 79, 196.967, 47.2},  {"Hg", 80, 200.59, 45.95},  {"Tl", 81, 204.383, 44.7},
    {"Pb", 82, 207.2, 43.45},   {"Bi", 83, 208.98, 42.19},
}};

constexpr std::array<int, 1> kValB{3};
constexpr std::array<int, 1> kValC{4};
constexpr std::array<int, 2> kValN{3, 5};
constexpr std::array<int, 1> kValO{2};
constexpr std::array<int, 2> kValP{3, 5};
constexpr std::array<int, 3> kValS{2, 4, 6};
constexpr std::array<int, 1> kValHalogen{1};

}  // namespace

const ElementInfo* find_element(std::string_view symbol) {
  for (const auto& e : kElements) {
    if (e.symbol == symbol) return &e;
  }
  return nullptr;
}

const ElementInfo* find_element(int atomic_number) {
  for (const auto& e : kElements) {
    if (e.atomic_number == atomic_number) return &e;
  }
  return nullptr;
}

std::span<const int> standard_valences(int atomic_number) {
  switch (atomic_number) {
    case 5: return kValB;
    case 6: return kValC;
    case 7: return kValN;
    case 8: return kValO;
    case 15: return kValP;
    case 16: return kValS;
    case 9:
    case 17:
    case 35:
    case 53: return kValHalogen;
    default: return {};
  }
}

}  // namespace descfm
