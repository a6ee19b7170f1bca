#include "temviro/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "temviro/byte_io.hpp"
#include "temviro/error.hpp"

namespace temviro {
namespace {

constexpr ErrorCode kCorrupt = ErrorCode::CorruptCheckpoint;

void put_record(std::ostream& out, const std::string& name, const nn::Shape& shape, std::span<const double> data) {
  byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) byte_io::put<std::uint64_t>(out, d);
  for (double v : data) byte_io::put_f64(out, v);
}

// Splits the header blob into architecture text and meta.* entries.
CheckpointMeta extract_meta(const std::string& blob) {
  CheckpointMeta meta;
  std::istringstream in(blob);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("meta.", 0) != 0) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    meta[line.substr(5, eq - 5)] = line.substr(eq + 3);
  }
  return meta;
}

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path, const CheckpointMeta& meta) {
  std::string blob = model.config().to_text();
  for (const auto& [k, v] : meta) {
    if (k.find_first_of("\n=") != std::string::npos || v.find('\n') != std::string::npos) {
      fail(ErrorCode::InvalidArgument, "checkpoint metadata may not contain newlines or '=' in keys");
    }
    blob += "meta." + k + " = " + v + "\n";
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write("TVCK", 4);
  byte_io::put<std::uint32_t>(out, kCheckpointVersion);
  byte_io::put<std::uint64_t>(out, blob.size());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  for (const auto& p : model.parameters()) put_record(out, p.name, p.value.shape(), p.value.data());
  for (const auto& b : model.batchnorm_buffers()) {
    const nn::Shape shape{b.state.running_mean.size()};
    put_record(out, b.name + ".running_mean", shape, b.state.running_mean);
    put_record(out, b.name + ".running_var", shape, b.state.running_var);
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  const std::string where = path.string();

  char magic[4] = {};
  if (!in.read(magic, 4) || std::string(magic, 4) != "TVCK") fail(kCorrupt, where + ": bad checkpoint magic");
  const auto version = byte_io::get<std::uint32_t>(in, kCorrupt, where);
  if (version != kCheckpointVersion) fail(ErrorCode::VersionMismatch, where + ": checkpoint version " + std::to_string(version));
  const auto blob_len = byte_io::get<std::uint64_t>(in, kCorrupt, where);
  if (blob_len > (1u << 24)) fail(kCorrupt, where + ": implausible header length");
  std::string blob(blob_len, '\0');
  if (!in.read(blob.data(), static_cast<std::streamsize>(blob_len))) fail(kCorrupt, where + ": truncated header");

  ArchConfig cfg;
  try {
    cfg = parse_arch_config(blob);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch) throw;
    fail(kCorrupt, where + ": unreadable architecture header (" + e.what() + ")");
  }
  Checkpoint ckpt{Model(cfg, 0), extract_meta(blob)};

  auto& params = ckpt.model.parameters();
  auto& buffers = ckpt.model.batchnorm_buffers();
  const std::size_t expected = params.size() + 2 * buffers.size();
  std::set<std::string> filled;

  for (std::size_t r = 0; r < expected; ++r) {
    const auto name_len = byte_io::get<std::uint32_t>(in, kCorrupt, where);
    if (name_len > 4096) fail(kCorrupt, where + ": implausible record name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) fail(kCorrupt, where + ": truncated record name");
    const auto ndim = byte_io::get<std::uint32_t>(in, kCorrupt, where);
    if (ndim > 8) fail(kCorrupt, where + ": implausible rank for " + name);
    nn::Shape shape(ndim);
    for (auto& d : shape) d = byte_io::get<std::uint64_t>(in, kCorrupt, where);

    std::span<double> target;
    nn::Shape want;
    for (auto& p : params) {
      if (p.name == name) {
        target = p.value.data();
        want = p.value.shape();
      }
    }
    for (auto& b : buffers) {
      if (name == b.name + ".running_mean") target = b.state.running_mean;
      if (name == b.name + ".running_var") target = b.state.running_var;
      if (!target.empty() && want.empty()) want = {target.size()};
    }
    if (target.empty()) fail(ErrorCode::VersionMismatch, where + ": record '" + name + "' is not part of the architecture");
    if (shape != want) {
      fail(ErrorCode::VersionMismatch, where + ": record '" + name + "' has shape " + nn::to_string(shape) + ", architecture expects " + nn::to_string(want));
    }
    if (!filled.insert(name).second) fail(kCorrupt, where + ": duplicate record '" + name + "'");
    for (double& v : target) v = byte_io::get_f64(in, kCorrupt, where);
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(kCorrupt, where + ": trailing bytes after the last record");
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ArchConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (!(ckpt.model.config() == expected)) {
    fail(ErrorCode::VersionMismatch, path.string() + ": checkpoint architecture differs from the requested configuration");
  }
  return ckpt;
}

}  // namespace temviro
