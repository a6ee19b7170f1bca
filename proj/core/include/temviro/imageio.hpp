#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "temviro/feature_map.hpp"

namespace temviro {

// 8-bit grayscale raster exactly as decoded from disk.
struct RawImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  friend bool operator==(const RawImage&, const RawImage&) = default;
};

// Decodes 8-bit single-channel PGM (P2/P5), PNG, or baseline uncompressed
// TIFF. The container is detected from the leading bytes, not the extension.
// Throws UnsupportedFormat or CorruptFile.
RawImage decode_image(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");
RawImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_pgm(const RawImage& img);
void save_pgm(const std::filesystem::path& path, const RawImage& img);

// pixels / 255.
FeatureMap normalize(const RawImage& img);

// Bilinear resampling with pixel-center alignment (source coordinate
// (dst + 0.5) * in/out - 0.5, clamped to the border). Sizes that already
// match are copied verbatim. Throws DegenerateInput when either input
// dimension is < 2.
FeatureMap resize_bilinear(const FeatureMap& img, std::size_t out_h, std::size_t out_w);

}  // namespace temviro
