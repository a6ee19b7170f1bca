#include "temviro/dataset.hpp"

#include <cstdio>
#include <system_error>

#include "temviro/error.hpp"
#include "temviro/parallel.hpp"

namespace temviro {
namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Keyed on the source path, its size and mtime, and every option that
// changes the maps.
std::string cache_stem(const std::filesystem::path& src, const PrepareOptions& opts) {
  std::error_code ec;
  const auto abs = std::filesystem::absolute(src, ec);
  const auto size = std::filesystem::file_size(src, ec);
  const auto mtime = std::filesystem::last_write_time(src, ec).time_since_epoch().count();
  std::string key = (ec ? src : abs).string();
  key += "|" + std::to_string(size) + "|" + std::to_string(mtime);
  key += "|" + std::to_string(opts.input_size) + "|" + std::to_string(opts.filter.window_size);
  key += opts.dct_signed_log ? "|log" : "|lin";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  return buf;
}

BranchInputs load_or_compute(const std::filesystem::path& src, const PrepareOptions& opts) {
  if (!opts.cache_dir) return prepare_image(load_image(src), opts);
  const std::string stem = cache_stem(src, opts);
  const auto a = *opts.cache_dir / (stem + ".stdfilt.tvfm");
  const auto b = *opts.cache_dir / (stem + ".dct.tvfm");
  if (std::filesystem::exists(a) && std::filesystem::exists(b)) {
    try {
      BranchInputs cached{read_tvfm(a), read_tvfm(b)};
      if (cached.stdfilt.height == opts.input_size && cached.dct.height == opts.input_size) return cached;
    } catch (const Error&) {
      // unreadable cache entries are recomputed
    }
  }
  BranchInputs fresh = prepare_image(load_image(src), opts);
  write_tvfm(a, fresh.stdfilt);
  write_tvfm(b, fresh.dct);
  return fresh;
}

}  // namespace

BranchInputs prepare_image(const RawImage& img, const PrepareOptions& opts) {
  BranchInputs in = branch_inputs(img, opts.input_size, opts.filter);
  if (opts.dct_signed_log) in.dct = signed_log(in.dct);
  return in;
}

std::vector<std::size_t> PreparedDataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == s) out.push_back(i);
  }
  return out;
}

PreparedDataset prepare_dataset(const DatasetManifest& manifest, const PrepareOptions& opts) {
  if (opts.cache_dir) std::filesystem::create_directories(*opts.cache_dir);
  PreparedDataset ds;
  ds.class_names = manifest.class_names;
  const std::size_t n = manifest.records.size();
  ds.inputs.resize(n);
  for (const auto& r : manifest.records) {
    if (r.class_id < 0 || static_cast<std::size_t>(r.class_id) >= manifest.class_names.size()) {
      fail(ErrorCode::LabelOutOfRange, r.path.string() + ": class id " + std::to_string(r.class_id));
    }
    ds.paths.push_back(r.path);
    ds.labels.push_back(r.class_id);
    ds.splits.push_back(r.split);
  }
  parallel_for(n, [&](std::size_t i) {
    try {
      ds.inputs[i] = load_or_compute(manifest.records[i].path, opts);
    } catch (const Error& e) {
      fail(e.code(), manifest.records[i].path.string() + ": " + e.detail());
    }
  });
  return ds;
}

}  // namespace temviro
