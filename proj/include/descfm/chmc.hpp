#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "descfm/descriptors.hpp"
#include "descfm/tensor.hpp"

namespace descfm {

// Generic weight container: "CHMC", u32 version, u32-length-prefixed UTF-8 JSON
// header, then every tensor as row-major little-endian float32 in the order
// listed under header["tensors"] ({name, rows, cols}). The header's "kind"
// says what the payload is (mpnn, descriptor_fnn, pca, pcamlp).
inline constexpr std::uint32_t kChmcVersion = 1;

struct ChmcFile {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
};

void write_chmc(std::ostream& out, const ChmcFile& f);
ChmcFile read_chmc(std::istream& in);
void save_chmc(const std::string& path, const ChmcFile& f);
ChmcFile load_chmc(const std::string& path);

// Helpers shared by the typed (de)serialisers.
nlohmann::json scaler_to_json(const ScalerStats& s);
ScalerStats scaler_from_json(const nlohmann::json& j);

}  // namespace descfm
