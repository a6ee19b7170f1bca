#include "temviro/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "temviro/error.hpp"
#include "temviro/rng.hpp"

namespace temviro {

double synth_angle_degrees(std::size_t cls, std::size_t classes) {
  return 180.0 * static_cast<double>(cls) / static_cast<double>(classes);
}

double synth_cycles(std::size_t cls) { return 6.0 + 4.0 * static_cast<double>(cls); }

std::string synth_class_name(std::size_t cls, std::size_t classes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "grating%03d", static_cast<int>(std::lround(synth_angle_degrees(cls, classes))));
  return buf;
}

RawImage synth_image(std::size_t cls, std::size_t index, const SynthOptions& opts) {
  if (opts.classes == 0 || cls >= opts.classes) fail(ErrorCode::InvalidArgument, "class index out of range");
  if (opts.size < 2) fail(ErrorCode::InvalidArgument, "synthetic images need size >= 2");
  Xoshiro256 rng(derive_seed(opts.seed, (static_cast<std::uint64_t>(cls) << 32) | index));
  const double theta = synth_angle_degrees(cls, opts.classes) * std::numbers::pi / 180.0;
  const double k = 2.0 * std::numbers::pi * synth_cycles(cls) / static_cast<double>(opts.size);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double c = std::cos(theta), s = std::sin(theta);

  RawImage img;
  img.height = img.width = opts.size;
  img.pixels.resize(opts.size * opts.size);
  for (std::size_t y = 0; y < opts.size; ++y) {
    for (std::size_t x = 0; x < opts.size; ++x) {
      const double u = static_cast<double>(x) * c + static_cast<double>(y) * s;
      double v = 0.5 + 0.35 * std::sin(k * u + phase) + rng.normal(0.0, opts.noise_sigma);
      v = std::clamp(v, 0.0, 1.0);
      img.pixels[y * opts.size + x] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  }
  return img;
}

DatasetManifest synth_dataset(const std::filesystem::path& out, const SynthOptions& opts) {
  DatasetManifest m;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out.string() + ": " + ec.message());
  const std::size_t per_class = opts.train_per_class + opts.test_per_class;
  for (std::size_t cls = 0; cls < opts.classes; ++cls) {
    const std::string name = synth_class_name(cls, opts.classes);
    m.class_names.push_back(name);
    const auto dir = out / name;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < per_class; ++i) {
      char file[64];
      std::snprintf(file, sizeof file, "%s_%04zu.pgm", name.c_str(), i);
      const auto path = dir / file;
      save_pgm(path, synth_image(cls, i, opts));
      m.records.push_back({path, static_cast<int>(cls), i < opts.train_per_class ? Split::train : Split::test});
    }
  }
  write_manifest_csv(out / "manifest.csv", m);
  return m;
}

}  // namespace temviro
