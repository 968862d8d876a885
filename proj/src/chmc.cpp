#include "descfm/chmc.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"

namespace descfm {

const Tensor& ChmcFile::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw InputError("checkpoint has no tensor '" + name + "'");
}

void write_chmc(std::ostream& out, const ChmcFile& f) {
  nlohmann::json header = f.header;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : f.tensors) header["tensors"].push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
  out.write("CHMC", 4);
  detail::write_pod<std::uint32_t>(out, kChmcVersion);
  detail::write_string(out, header.dump());
  for (const auto& [name, t] : f.tensors)
    for (double x : t.values()) detail::write_pod<float>(out, static_cast<float>(x));
  if (!out) throw InputError("failed writing CHMC stream");
}

ChmcFile read_chmc(std::istream& in) {
  detail::expect_magic(in, "CHMC");
  const auto version = detail::read_pod<std::uint32_t>(in, "CHMC version");
  if (version != kChmcVersion) throw InputError("unsupported CHMC version " + std::to_string(version));
  ChmcFile f;
  try {
    f.header = nlohmann::json::parse(detail::read_string(in, "CHMC header"));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("CHMC header is not valid JSON: ") + e.what());
  }
  if (!f.header.contains("tensors") || !f.header["tensors"].is_array()) throw InputError("CHMC header lacks a tensor table");
  for (const auto& entry : f.header["tensors"]) {
    const auto rows = entry.at("rows").get<std::size_t>();
    const auto cols = entry.at("cols").get<std::size_t>();
    if (rows * cols > (std::size_t{1} << 31)) throw InputError("implausible CHMC tensor size");
    Tensor t(rows, cols);
    for (double& x : t.values()) x = static_cast<double>(detail::read_pod<float>(in, "CHMC tensor data"));
    f.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
  }
  f.header.erase("tensors");
  return f;
}

void save_chmc(const std::string& path, const ChmcFile& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  write_chmc(out, f);
}

ChmcFile load_chmc(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return read_chmc(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": malformed CHMC header: " + e.what());
  }
}

nlohmann::json scaler_to_json(const ScalerStats& s) {
  std::vector<int> constant(s.constant.begin(), s.constant.end());
  return {{"names", s.names}, {"mean", s.mean}, {"std", s.std}, {"constant", constant}, {"clip_sigmas", s.clip_sigmas}};
}

ScalerStats scaler_from_json(const nlohmann::json& j) {
  ScalerStats s;
  s.names = j.at("names").get<std::vector<std::string>>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  for (int c : j.at("constant").get<std::vector<int>>()) s.constant.push_back(static_cast<std::uint8_t>(c));
  s.clip_sigmas = j.at("clip_sigmas").get<double>();
  if (s.mean.size() != s.names.size() || s.std.size() != s.names.size() || s.constant.size() != s.names.size())
    throw InputError("scaler statistics have inconsistent lengths");
  return s;
}

}  // namespace descfm
