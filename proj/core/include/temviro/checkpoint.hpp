#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "temviro/model.hpp"

namespace temviro {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Free-form training metadata (epoch, seed, metric snapshot). Stored as
// `meta.<key> = <value>` lines after the architecture text.
using CheckpointMeta = std::map<std::string, std::string>;

struct Checkpoint {
  Model model;
  CheckpointMeta meta;
};

// Little-endian TVCK container:
//   "TVCK" | u32 version | u64 blob length | config + meta text
//   repeated: u32 name length | name | u32 ndim | u64 dims[ndim] | f64 data
// Records cover every parameter and every batchnorm running mean/variance.
void save_checkpoint(const Model& model, const std::filesystem::path& path, const CheckpointMeta& meta = {});

// Throws CorruptCheckpoint on bad magic, truncation or trailing bytes and
// VersionMismatch on an unknown container version or records that do not
// match the embedded architecture.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// As above, and additionally rejects a checkpoint whose architecture differs
// from `expected` (VersionMismatch).
Checkpoint load_checkpoint(const std::filesystem::path& path, const ArchConfig& expected);

}  // namespace temviro
