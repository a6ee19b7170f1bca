#include "temviro/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "temviro/error.hpp"

namespace temviro {
namespace {

// Row-major N x N orthonormal DCT-II matrix: basis[k * N + n].
std::vector<double> dct_basis(std::size_t n) {
  std::vector<double> basis(n * n);
  const double a0 = 1.0 / std::sqrt(static_cast<double>(n));
  const double ak = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double alpha = k == 0 ? a0 : ak;
    for (std::size_t i = 0; i < n; ++i) {
      // Reduce k(2i+1) modulo the 4N period before scaling by pi/(2N).
      const std::size_t r = (k * (2 * i + 1)) % (4 * n);
      basis[k * n + i] = alpha * std::cos(std::numbers::pi * static_cast<double>(r) / (2.0 * static_cast<double>(n)));
    }
  }
  return basis;
}

// out[r][k] = sum_i in[r][i] * basis[k][i]   (forward along rows)
// With `transpose` the basis is applied as its transpose (inverse transform).
FeatureMap transform_rows(const FeatureMap& in, const std::vector<double>& basis, bool transpose) {
  const std::size_t n = in.width;
  FeatureMap out(in.height, n);
  for (std::size_t r = 0; r < in.height; ++r) {
    const double* x = in.values.data() + r * n;
    double* y = out.values.data() + r * n;
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      if (!transpose) {
        const double* b = basis.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) acc += x[i] * b[i];
      } else {
        for (std::size_t i = 0; i < n; ++i) acc += x[i] * basis[i * n + k];
      }
      y[k] = acc;
    }
  }
  return out;
}

FeatureMap transpose(const FeatureMap& in) {
  FeatureMap out(in.width, in.height);
  for (std::size_t r = 0; r < in.height; ++r) {
    for (std::size_t c = 0; c < in.width; ++c) out(c, r) = in(r, c);
  }
  return out;
}

FeatureMap separable(const FeatureMap& img, bool inverse) {
  if (img.height == 0 || img.width == 0) fail(ErrorCode::DegenerateInput, "DCT of an empty map");
  const auto row_basis = dct_basis(img.width);
  const auto col_basis = img.height == img.width ? row_basis : dct_basis(img.height);
  const FeatureMap rows = transform_rows(img, row_basis, inverse);
  return transpose(transform_rows(transpose(rows), col_basis, inverse));
}

}  // namespace

void FilterSpec::validate() const {
  if (window_size < 3 || window_size % 2 == 0) {
    fail(ErrorCode::InvalidArgument, "window size must be odd and >= 3, got " + std::to_string(window_size));
  }
}

FeatureMap symmetric_pad(const FeatureMap& img, std::size_t k) {
  if (k == 0) return img;
  if (k >= std::min(img.height, img.width)) {
    fail(ErrorCode::PadTooWide, "pad width " + std::to_string(k) + " needs an image larger than " +
                                    std::to_string(img.height) + "x" + std::to_string(img.width));
  }
  // Padded index p maps to source index p - k, reflected about the outer
  // edge of the first/last pixel: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
  auto source = [k](std::size_t p, std::size_t n) -> std::size_t {
    const auto i = static_cast<std::ptrdiff_t>(p) - static_cast<std::ptrdiff_t>(k);
    if (i < 0) return static_cast<std::size_t>(-i - 1);
    if (i >= static_cast<std::ptrdiff_t>(n)) return 2 * n - 1 - static_cast<std::size_t>(i);
    return static_cast<std::size_t>(i);
  };
  FeatureMap out(img.height + 2 * k, img.width + 2 * k);
  for (std::size_t r = 0; r < out.height; ++r) {
    const std::size_t sr = source(r, img.height);
    for (std::size_t c = 0; c < out.width; ++c) out(r, c) = img(sr, source(c, img.width));
  }
  return out;
}

FeatureMap local_mean(const FeatureMap& padded, const FilterSpec& spec) {
  spec.validate();
  const std::size_t w = spec.window_size;
  if (padded.height < w || padded.width < w) fail(ErrorCode::DegenerateInput, "padded image smaller than the window");
  const double p = static_cast<double>(w * w);
  FeatureMap out(padded.height - w + 1, padded.width - w + 1);
  for (std::size_t r = 0; r < out.height; ++r) {
    for (std::size_t c = 0; c < out.width; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t j = 0; j < w; ++j) sum += padded(r + i, c + j);
      }
      out(r, c) = sum / p;
    }
  }
  return out;
}

FeatureMap local_std_filter(const FeatureMap& img, const FilterSpec& spec) {
  spec.validate();
  const std::size_t w = spec.window_size;
  const std::size_t k = spec.pad_width();
  const FeatureMap padded = symmetric_pad(img, k);
  const double p = static_cast<double>(w * w);

  // Deviations are taken about the window centre first so a constant window
  // yields exactly zero, then re-centred on their mean.
  FeatureMap out(img.height, img.width);
  std::vector<double> d(w * w);
  for (std::size_t r = 0; r < out.height; ++r) {
    for (std::size_t c = 0; c < out.width; ++c) {
      const double centre = padded(r + k, c + k);
      double sum = 0.0;
      for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
          d[i * w + j] = padded(r + i, c + j) - centre;
          sum += d[i * w + j];
        }
      }
      const double mean = sum / p;
      double ss = 0.0;
      for (double v : d) ss += (v - mean) * (v - mean);
      out(r, c) = std::sqrt(ss / p);
    }
  }
  return out;
}

std::vector<double> dct1d(std::span<const double> x) {
  if (x.empty()) fail(ErrorCode::DegenerateInput, "DCT of an empty vector");
  const FeatureMap in(1, x.size(), std::vector<double>(x.begin(), x.end()));
  return transform_rows(in, dct_basis(x.size()), false).values;
}

std::vector<double> idct1d(std::span<const double> coeffs) {
  if (coeffs.empty()) fail(ErrorCode::DegenerateInput, "inverse DCT of an empty vector");
  const FeatureMap in(1, coeffs.size(), std::vector<double>(coeffs.begin(), coeffs.end()));
  return transform_rows(in, dct_basis(coeffs.size()), true).values;
}

FeatureMap dct2(const FeatureMap& img) { return separable(img, false); }

FeatureMap idct2(const FeatureMap& coeffs) { return separable(coeffs, true); }

FeatureMap signed_log(const FeatureMap& map) {
  FeatureMap out = map;
  for (double& v : out.values) v = std::copysign(std::log1p(std::abs(v)), v);
  return out;
}

BranchInputs branch_inputs(const RawImage& img, std::size_t size, const FilterSpec& spec) {
  const FeatureMap resized = resize_bilinear(normalize(img), size, size);
  return {local_std_filter(resized, spec), dct2(resized)};
}

}  // namespace temviro
