#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "temviro/feature_map.hpp"
#include "temviro/imageio.hpp"

namespace temviro {

// Sliding-window parameters for the local standard-deviation filter.
// The pad width is derived so that the output keeps the input size.
struct FilterSpec {
  std::size_t window_size = 3;

  std::size_t pad_width() const { return (window_size - 1) / 2; }
  void validate() const;  // odd and >= 3, else InvalidArgument
};

// Mirror padding that repeats the edge row/column: [1 2] -> [1 1 2 2].
// Throws PadTooWide when k >= min(h, w).
FeatureMap symmetric_pad(const FeatureMap& img, std::size_t k);

// Window mean over an already padded image; output shrinks by 2 * pad_width.
FeatureMap local_mean(const FeatureMap& padded, const FilterSpec& spec = {});

// Pads, then replaces each pixel by the population standard deviation of its
// window_size x window_size neighbourhood. Output size equals input size.
FeatureMap local_std_filter(const FeatureMap& img, const FilterSpec& spec = {});

// Orthonormal DCT-II and its inverse (DCT-III).
std::vector<double> dct1d(std::span<const double> x);
std::vector<double> idct1d(std::span<const double> coeffs);

// Separable 2D transform: dct1d over every row, then over every column.
FeatureMap dct2(const FeatureMap& img);
FeatureMap idct2(const FeatureMap& coeffs);

// sign(x) * log(1 + |x|), applied elementwise.
FeatureMap signed_log(const FeatureMap& map);

inline constexpr std::size_t kBranchInputSize = 128;

struct BranchInputs {
  FeatureMap stdfilt;  // first convolutional model
  FeatureMap dct;      // second convolutional model
};

// normalize -> resize to size x size -> (local_std_filter, dct2).
BranchInputs branch_inputs(const RawImage& img, std::size_t size = kBranchInputSize, const FilterSpec& spec = {});

}  // namespace temviro
