#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "oracle_values.hpp"
#include "temviro/imageio.hpp"
#include "test_support.hpp"

using namespace temviro;
using testing_support::data_path;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RawImage expected_gray_6x7() {
  std::ifstream in(data_path("gray_6x7.txt"));
  RawImage img;
  img.height = 6;
  img.width = 7;
  int v;
  while (in >> v) img.pixels.push_back(static_cast<std::uint8_t>(v));
  return img;
}

}  // namespace

TEST(Pgm, AsciiP2) {
  const auto img = decode_image(bytes_of("P2\n# comment\n3 2\n255\n0 1 2\n253 254 255\n"));
  EXPECT_EQ(img.height, 2u);
  EXPECT_EQ(img.width, 3u);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{0, 1, 2, 253, 254, 255}));
}

TEST(Pgm, BinaryP5RoundTrip) {
  RawImage img{4, 5, {}};
  for (int i = 0; i < 20; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 13));
  const auto enc = encode_pgm(img);
  EXPECT_EQ(decode_image(enc), img);
}

TEST(Pgm, SmallerMaxvalKeepsRawSamples) {
  const auto img = decode_image(bytes_of("P2 2 1 15 3 15"));
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{3, 15}));
}

TEST(Pgm, RejectsSixteenBit) {
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of("P2 1 1 65535 300")), ErrorCode::UnsupportedFormat);
}

TEST(Pgm, RejectsColour) {
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of("P6 1 1 255 abc")), ErrorCode::UnsupportedFormat);
}

TEST(Pgm, RejectsTruncatedRaster) {
  std::string s = "P5 4 4 255\n";
  s += std::string(10, 'x');
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of(s)), ErrorCode::CorruptFile);
}

TEST(Pgm, RejectsMalformedHeaderAndZeroSize) {
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of("P5 x 4 255\n")), ErrorCode::CorruptFile);
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of("P5 0 4 255\n")), ErrorCode::CorruptFile);
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of("P2 2 1 10 3 11")), ErrorCode::CorruptFile);
}

TEST(Container, UnknownBytes) {
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of("GIF89a......")), ErrorCode::UnsupportedFormat);
  EXPECT_TEMVIRO_ERROR(decode_image(bytes_of("")), ErrorCode::UnsupportedFormat);
}

TEST(Container, DetectedFromContentNotExtension) {
  testing_support::TempDir dir("imageio");
  const auto png = read_bytes(data_path("gray_6x7.png"));
  const auto renamed = dir / "actually_png.tif";
  std::ofstream(renamed, std::ios::binary).write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
  EXPECT_EQ(load_image(renamed), expected_gray_6x7());
}

TEST(Png, Gray8) { EXPECT_EQ(load_image(data_path("gray_6x7.png")), expected_gray_6x7()); }

TEST(Png, RejectsRgbAndSixteenBit) {
  EXPECT_TEMVIRO_ERROR(load_image(data_path("rgb_6x7.png")), ErrorCode::UnsupportedFormat);
  EXPECT_TEMVIRO_ERROR(load_image(data_path("gray16_6x7.png")), ErrorCode::UnsupportedFormat);
}

TEST(Png, RejectsTruncated) {
  auto png = read_bytes(data_path("gray_6x7.png"));
  png.resize(png.size() / 2);
  EXPECT_TEMVIRO_ERROR(decode_image(png), ErrorCode::CorruptFile);
}

TEST(Tiff, Gray8Uncompressed) { EXPECT_EQ(load_image(data_path("gray_6x7.tif")), expected_gray_6x7()); }

TEST(Tiff, RejectsCompressedAndRgb) {
  EXPECT_TEMVIRO_ERROR(load_image(data_path("gray_6x7_packbits.tif")), ErrorCode::UnsupportedFormat);
  EXPECT_TEMVIRO_ERROR(load_image(data_path("rgb_6x7.tif")), ErrorCode::UnsupportedFormat);
}

TEST(Tiff, RejectsTruncated) {
  auto tif = read_bytes(data_path("gray_6x7.tif"));
  tif.resize(6);
  EXPECT_TEMVIRO_ERROR(decode_image(tif), ErrorCode::CorruptFile);
}

TEST(Load, MissingFileIsIo) { EXPECT_TEMVIRO_ERROR(load_image("/nonexistent/file.pgm"), ErrorCode::Io); }

TEST(Normalize, DividesBy255) {
  const RawImage img{1, 3, {0, 51, 255}};
  const auto f = normalize(img);
  EXPECT_EQ(f.values, (std::vector<double>{0.0, 0.2, 1.0}));
}

TEST(Resize, MatchesReferenceUpsample) {
  const FeatureMap in(4, 5, std::vector<double>(std::begin(oracle::kResizeInput4x5), std::end(oracle::kResizeInput4x5)));
  const auto out = resize_bilinear(in, 7, 9);
  ASSERT_EQ(out.height, 7u);
  ASSERT_EQ(out.width, 9u);
  // The reference resampler stores its interpolation weights in single precision.
  EXPECT_LT(testing_support::max_abs_diff(out.values, oracle::kResize4x5To7x9), 1e-6);
}

TEST(Resize, MatchesReferenceDownsample) {
  const FeatureMap in(4, 5, std::vector<double>(std::begin(oracle::kResizeInput4x5), std::end(oracle::kResizeInput4x5)));
  const auto out = resize_bilinear(in, 2, 3);
  EXPECT_LT(testing_support::max_abs_diff(out.values, oracle::kResize4x5To2x3), 1e-6);
}

TEST(Resize, IdentityAndConstant) {
  FeatureMap in(3, 4);
  for (std::size_t i = 0; i < in.size(); ++i) in.values[i] = 0.1 * static_cast<double>(i);
  EXPECT_EQ(resize_bilinear(in, 3, 4), in);

  const FeatureMap flat(5, 6, 0.37);
  const auto up = resize_bilinear(flat, 11, 3);
  for (double v : up.values) EXPECT_EQ(v, 0.37);
}

TEST(Resize, DegenerateInput) {
  EXPECT_TEMVIRO_ERROR(resize_bilinear(FeatureMap(1, 5), 4, 4), ErrorCode::DegenerateInput);
  EXPECT_TEMVIRO_ERROR(resize_bilinear(FeatureMap(5, 1), 4, 4), ErrorCode::DegenerateInput);
  EXPECT_TEMVIRO_ERROR(resize_bilinear(FeatureMap(5, 5), 0, 4), ErrorCode::DegenerateInput);
}

TEST(FeatureMapFile, RoundTripAndCorruption) {
  testing_support::TempDir dir("tvfm");
  FeatureMap m(3, 2, {1.5, -2.0, 1e-300, 0.0, 7.25, -0.0});
  write_tvfm(dir / "m.tvfm", m);
  const auto back = read_tvfm(dir / "m.tvfm");
  EXPECT_EQ(back, m);
  EXPECT_TRUE(std::signbit(back.values[5]));

  auto bytes = read_bytes(dir / "m.tvfm");
  bytes.pop_back();
  std::ofstream(dir / "short.tvfm", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  EXPECT_ANY_THROW(read_tvfm(dir / "short.tvfm"));
}
