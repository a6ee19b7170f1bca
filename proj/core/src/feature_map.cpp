#include "temviro/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "temviro/byte_io.hpp"
#include "temviro/error.hpp"

namespace temviro {

FeatureMap::FeatureMap(std::size_t h, std::size_t w, std::vector<double> v)
    : height(h), width(w), values(std::move(v)) {
  if (values.size() != h * w) {
    fail(ErrorCode::ShapeMismatch, "feature map values length " + std::to_string(values.size()) +
                                       " != " + std::to_string(h) + "x" + std::to_string(w));
  }
}

bool FeatureMap::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void write_tvfm(const std::filesystem::path& path, const FeatureMap& map) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write("TVFM", 4);
  byte_io::put<std::uint32_t>(out, kFeatureMapVersion);
  byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(map.height));
  byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(map.width));
  for (double v : map.values) byte_io::put_f64(out, v);
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

FeatureMap read_tvfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  const std::string where = path.string();
  char magic[4] = {};
  if (!in.read(magic, 4) || std::string(magic, 4) != "TVFM") fail(ErrorCode::CorruptFile, where + ": bad TVFM magic");
  const auto version = byte_io::get<std::uint32_t>(in, ErrorCode::CorruptFile, where);
  if (version != kFeatureMapVersion) {
    fail(ErrorCode::VersionMismatch, where + ": TVFM version " + std::to_string(version));
  }
  const auto h = byte_io::get<std::uint32_t>(in, ErrorCode::CorruptFile, where);
  const auto w = byte_io::get<std::uint32_t>(in, ErrorCode::CorruptFile, where);
  FeatureMap map(h, w);
  for (double& v : map.values) v = byte_io::get_f64(in, ErrorCode::CorruptFile, where);
  return map;
}

}  // namespace temviro
