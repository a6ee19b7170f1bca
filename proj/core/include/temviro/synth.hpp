#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "temviro/imageio.hpp"
#include "temviro/manifest.hpp"

namespace temviro {

struct SynthOptions {
  std::size_t classes = 4;
  std::size_t train_per_class = 200;
  std::size_t test_per_class = 50;
  std::size_t size = 128;
  double noise_sigma = 0.1;  // fraction of the [0, 1] intensity range
  std::uint64_t seed = 1;
};

// Class c is a sinusoidal grating at 180 * c / classes degrees with
// 6 + 4c cycles across the image; phase is random per image.
double synth_angle_degrees(std::size_t cls, std::size_t classes);
double synth_cycles(std::size_t cls);
std::string synth_class_name(std::size_t cls, std::size_t classes);

// Image `index` of class `cls`. Depends only on (options.seed, cls, index).
RawImage synth_image(std::size_t cls, std::size_t index, const SynthOptions& opts);

// Writes <out>/<class>/<class>_<index>.pgm and <out>/manifest.csv. The first
// train_per_class images of each class form the train split.
DatasetManifest synth_dataset(const std::filesystem::path& out, const SynthOptions& opts = {});

}  // namespace temviro
