#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace temviro {

enum class Split { unassigned, train, test };

std::string_view to_string(Split s);
Split parse_split(std::string_view text);

struct SampleRecord {
  std::filesystem::path path;
  int class_id = 0;
  Split split = Split::unassigned;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

// Immutable once built. Records are sorted by (class_id, path).
struct DatasetManifest {
  std::vector<SampleRecord> records;
  std::vector<std::string> class_names;

  std::size_t count(int class_id, Split split) const;
  std::vector<std::size_t> indices(Split split) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Labels used by the TEM virus dataset, in class-id order.
const std::vector<std::string>& tem_virus_class_names();

// One subdirectory per class under `root`; class names are the directory
// names sorted lexicographically and every regular file inside is a sample.
// Throws ClassCountMismatch when the directory count differs from
// `expected_classes`.
DatasetManifest build_manifest(const std::filesystem::path& root, std::size_t expected_classes = 14);

// Per class, shuffles the sorted records with xoshiro256** and marks the
// first floor(train_fraction * n_c) as train, the rest as test.
DatasetManifest split_stratified(const DatasetManifest& m, double train_fraction, std::uint64_t seed);

// CSV with header `path,class_id,split`. Class names travel in a leading
// `# classes: a;b;c` comment line. Relative paths are resolved against the
// manifest's directory on read and written relative to it when possible.
void write_manifest_csv(const std::filesystem::path& file, const DatasetManifest& m);
DatasetManifest read_manifest_csv(const std::filesystem::path& file);

}  // namespace temviro
