#include "temviro/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>

#include "temviro/error.hpp"

namespace temviro {
namespace {

bool starts_with(std::span<const std::uint8_t> bytes, std::initializer_list<std::uint8_t> sig) {
  return bytes.size() >= sig.size() && std::equal(sig.begin(), sig.end(), bytes.begin());
}

// ---------------------------------------------------------------- PGM

class PnmCursor {
 public:
  PnmCursor(std::span<const std::uint8_t> bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail(ErrorCode::CorruptFile, name_ + ": malformed PGM header");
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1ul << 31)) fail(ErrorCode::CorruptFile, name_ + ": PGM field out of range");
    }
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  const std::string& name_;
  std::size_t pos_ = 2;
};

RawImage decode_pnm(std::span<const std::uint8_t> bytes, const std::string& name) {
  const char kind = static_cast<char>(bytes[1]);
  if (kind == '3' || kind == '6') fail(ErrorCode::UnsupportedFormat, name + ": PPM colour images are not supported");
  if (kind != '2' && kind != '5') fail(ErrorCode::UnsupportedFormat, name + ": unsupported PNM variant P" + kind);

  PnmCursor cur(bytes, name);
  RawImage img;
  img.width = cur.number();
  img.height = cur.number();
  const unsigned long maxval = cur.number();
  if (img.width == 0 || img.height == 0 || maxval == 0) fail(ErrorCode::CorruptFile, name + ": zero PGM dimension");
  if (maxval > 255) fail(ErrorCode::UnsupportedFormat, name + ": PGM deeper than 8 bits");
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);

  if (kind == '5') {
    // Exactly one whitespace byte separates the header from the raster.
    if (cur.pos() >= bytes.size() || !std::isspace(bytes[cur.pos()])) fail(ErrorCode::CorruptFile, name + ": malformed PGM header");
    cur.advance(1);
    if (bytes.size() - cur.pos() < count) fail(ErrorCode::CorruptFile, name + ": truncated PGM raster");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos()), count, img.pixels.begin());
  } else {
    for (auto& p : img.pixels) {
      const unsigned long v = cur.number();
      if (v > maxval) fail(ErrorCode::CorruptFile, name + ": PGM sample exceeds maxval");
      p = static_cast<std::uint8_t>(v);
    }
  }
  for (auto p : img.pixels) {
    if (p > maxval) fail(ErrorCode::CorruptFile, name + ": PGM sample exceeds maxval");
  }
  return img;
}

// ---------------------------------------------------------------- PNG

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

RawImage decode_png(std::span<const std::uint8_t> bytes, const std::string& name) {
  // IHDR is always the first chunk: 8-byte signature, length, "IHDR",
  // width, height, bit depth, colour type.
  if (bytes.size() < 33 || std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) {
    fail(ErrorCode::CorruptFile, name + ": missing PNG IHDR");
  }
  const int bit_depth = bytes[24];
  const int color_type = bytes[25];
  if (color_type != PNG_COLOR_TYPE_GRAY) fail(ErrorCode::UnsupportedFormat, name + ": PNG is not single-channel grayscale");
  if (bit_depth != 8) fail(ErrorCode::UnsupportedFormat, name + ": PNG bit depth " + std::to_string(bit_depth) + " is not 8");

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorCode::CorruptFile, name + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  RawImage img;
  img.width = image.width;
  img.height = image.height;
  img.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::CorruptFile, name + ": " + msg);
  }
  if (img.pixels.size() != img.width * img.height || img.pixels.empty()) {
    fail(ErrorCode::CorruptFile, name + ": PNG size mismatch");
  }
  return img;
}

// ---------------------------------------------------------------- TIFF

class TiffReader {
 public:
  TiffReader(std::span<const std::uint8_t> bytes, const std::string& name)
      : bytes_(bytes), name_(name), little_(bytes[0] == 'I') {}

  RawImage decode() {
    if (u16(2) == 43) fail(ErrorCode::UnsupportedFormat, name_ + ": BigTIFF is not supported");
    if (u16(2) != 42) fail(ErrorCode::CorruptFile, name_ + ": bad TIFF magic");
    const std::size_t ifd = u32(4);
    const std::size_t entries = u16(ifd);

    std::map<std::uint16_t, std::vector<std::uint32_t>> tags;
    for (std::size_t i = 0; i < entries; ++i) {
      const std::size_t e = ifd + 2 + 12 * i;
      const std::uint16_t tag = u16(e);
      const std::uint16_t type = u16(e + 2);
      const std::uint32_t count = u32(e + 4);
      tags[tag] = values(type, count, e + 8);
    }

    auto scalar = [&](std::uint16_t tag, std::optional<std::uint32_t> fallback) -> std::uint32_t {
      auto it = tags.find(tag);
      if (it == tags.end() || it->second.empty()) {
        if (!fallback) fail(ErrorCode::CorruptFile, name_ + ": missing TIFF tag " + std::to_string(tag));
        return *fallback;
      }
      return it->second.front();
    };

    if (scalar(259, 1) != 1) fail(ErrorCode::UnsupportedFormat, name_ + ": compressed TIFF is not supported");
    if (scalar(277, 1) != 1) fail(ErrorCode::UnsupportedFormat, name_ + ": multi-channel TIFF is not supported");
    if (scalar(258, 1) != 8) fail(ErrorCode::UnsupportedFormat, name_ + ": TIFF is not 8 bits per sample");
    if (scalar(262, std::nullopt) != 1) fail(ErrorCode::UnsupportedFormat, name_ + ": only BlackIsZero grayscale TIFF is supported");
    if (scalar(339, 1) != 1) fail(ErrorCode::UnsupportedFormat, name_ + ": non-integer TIFF samples");
    if (tags.count(322) != 0) fail(ErrorCode::UnsupportedFormat, name_ + ": tiled TIFF is not supported");

    RawImage img;
    img.width = scalar(256, std::nullopt);
    img.height = scalar(257, std::nullopt);
    if (img.width == 0 || img.height == 0) fail(ErrorCode::CorruptFile, name_ + ": zero TIFF dimension");
    const std::size_t rows_per_strip = std::min<std::size_t>(scalar(278, 0xffffffffu), img.height);
    const auto& offsets = tags[273];
    const auto& counts = tags[279];
    if (offsets.empty() || offsets.size() != counts.size()) fail(ErrorCode::CorruptFile, name_ + ": bad TIFF strip tables");

    img.pixels.reserve(img.width * img.height);
    std::size_t row = 0;
    for (std::size_t s = 0; s < offsets.size() && row < img.height; ++s) {
      const std::size_t strip_rows = std::min(rows_per_strip, img.height - row);
      const std::size_t need = strip_rows * img.width;
      if (counts[s] < need) fail(ErrorCode::CorruptFile, name_ + ": short TIFF strip");
      check(offsets[s], need);
      img.pixels.insert(img.pixels.end(), bytes_.begin() + offsets[s], bytes_.begin() + offsets[s] + static_cast<std::ptrdiff_t>(need));
      row += strip_rows;
    }
    if (row != img.height) fail(ErrorCode::CorruptFile, name_ + ": TIFF strips do not cover the image");
    return img;
  }

 private:
  void check(std::size_t off, std::size_t len) const {
    if (off > bytes_.size() || bytes_.size() - off < len) fail(ErrorCode::CorruptFile, name_ + ": truncated TIFF");
  }

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    const auto* p = bytes_.data() + off;
    return little_ ? static_cast<std::uint16_t>(p[0] | (p[1] << 8)) : static_cast<std::uint16_t>((p[0] << 8) | p[1]);
  }

  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    const auto* p = bytes_.data() + off;
    return little_ ? (std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24))
                   : be32(p);
  }

  std::vector<std::uint32_t> values(std::uint16_t type, std::uint32_t count, std::size_t field) const {
    std::size_t width = 0;
    switch (type) {
      case 1: case 2: case 6: case 7: width = 1; break;  // BYTE, ASCII, SBYTE, UNDEFINED
      case 3: case 8: width = 2; break;                  // SHORT, SSHORT
      case 4: case 9: width = 4; break;                  // LONG, SLONG
      default: return {};                                // rationals etc. are never needed here
    }
    if (count > bytes_.size()) fail(ErrorCode::CorruptFile, name_ + ": TIFF tag count out of range");
    const std::size_t base = count * width <= 4 ? field : u32(field);
    std::vector<std::uint32_t> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t off = base + i * width;
      if (width == 1) {
        check(off, 1);
        out[i] = bytes_[off];
      } else if (width == 2) {
        out[i] = u16(off);
      } else {
        out[i] = u32(off);
      }
    }
    return out;
  }

  std::span<const std::uint8_t> bytes_;
  const std::string& name_;
  bool little_;
};

}  // namespace

RawImage decode_image(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') return decode_pnm(bytes, name);
  if (starts_with(bytes, {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a})) return decode_png(bytes, name);
  if (starts_with(bytes, {'I', 'I'}) || starts_with(bytes, {'M', 'M'})) {
    if (bytes.size() < 8) fail(ErrorCode::CorruptFile, name + ": truncated TIFF header");
    return TiffReader(bytes, name).decode();
  }
  fail(ErrorCode::UnsupportedFormat, name + ": unrecognised image container");
}

RawImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_image(bytes, path.string());
}

std::vector<std::uint8_t> encode_pgm(const RawImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

void save_pgm(const std::filesystem::path& path, const RawImage& img) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

FeatureMap normalize(const RawImage& img) {
  FeatureMap out(img.height, img.width);
  std::transform(img.pixels.begin(), img.pixels.end(), out.values.begin(),
                 [](std::uint8_t p) { return static_cast<double>(p) / 255.0; });
  return out;
}

FeatureMap resize_bilinear(const FeatureMap& img, std::size_t out_h, std::size_t out_w) {
  if (img.height < 2 || img.width < 2) {
    fail(ErrorCode::DegenerateInput, "resize input " + std::to_string(img.height) + "x" + std::to_string(img.width) + " is smaller than 2x2");
  }
  if (out_h == 0 || out_w == 0) fail(ErrorCode::DegenerateInput, "resize target has a zero dimension");
  if (img.height == out_h && img.width == out_w) return img;

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
      const double src = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      const std::size_t hi = std::min(lo + 1, in - 1);
      t[i] = {lo, hi, src - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(img.height, out_h);
  const auto tx = taps(img.width, out_w);

  FeatureMap out(out_h, out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    const auto& y = ty[r];
    for (std::size_t c = 0; c < out_w; ++c) {
      const auto& x = tx[c];
      const double top = std::lerp(img(y.lo, x.lo), img(y.lo, x.hi), x.frac);
      const double bottom = std::lerp(img(y.hi, x.lo), img(y.hi, x.hi), x.frac);
      out(r, c) = std::lerp(top, bottom, y.frac);
    }
  }
  return out;
}

}  // namespace temviro
