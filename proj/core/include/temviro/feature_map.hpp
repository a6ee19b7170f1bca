#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace temviro {

// Real-valued row-major 2D matrix: normalized images, filter output,
// DCT coefficients.
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), values(h * w, fill) {}
  FeatureMap(std::size_t h, std::size_t w, std::vector<double> v);

  double& operator()(std::size_t r, std::size_t c) { return values[r * width + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * width + c]; }

  std::size_t size() const { return values.size(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * width, width}; }

  bool all_finite() const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

// TVFM container: "TVFM", u32 version = 1, u32 height, u32 width, then
// height*width little-endian float64 values, row-major.
inline constexpr std::uint32_t kFeatureMapVersion = 1;

void write_tvfm(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap read_tvfm(const std::filesystem::path& path);

}  // namespace temviro
