#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "temviro/manifest.hpp"
#include "temviro/preprocess.hpp"

namespace temviro {

struct PrepareOptions {
  std::size_t input_size = kBranchInputSize;
  FilterSpec filter;
  bool dct_signed_log = false;
  // When set, branch inputs are stored here as TVFM files and reused.
  std::optional<std::filesystem::path> cache_dir;
};

// branch_inputs plus the optional signed-log compression of the DCT map.
BranchInputs prepare_image(const RawImage& img, const PrepareOptions& opts);

// Every manifest sample decoded and preprocessed once, in manifest order.
struct PreparedDataset {
  std::vector<std::string> class_names;
  std::vector<std::filesystem::path> paths;
  std::vector<BranchInputs> inputs;
  std::vector<int> labels;
  std::vector<Split> splits;

  std::size_t size() const { return inputs.size(); }
  std::vector<std::size_t> indices(Split s) const;
};

// Decode and shape errors are rethrown with the sample path attached.
// Work is spread over parallel_for; the result does not depend on the
// worker count or on whether the cache was warm.
PreparedDataset prepare_dataset(const DatasetManifest& manifest, const PrepareOptions& opts);

}  // namespace temviro
