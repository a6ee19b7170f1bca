#include "temviro/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "temviro/error.hpp"
#include "temviro/rng.hpp"

namespace fs = std::filesystem;

namespace temviro {
namespace {

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

void sort_records(std::vector<SampleRecord>& records) {
  std::sort(records.begin(), records.end(), [](const SampleRecord& a, const SampleRecord& b) {
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    return a.path.generic_string() < b.path.generic_string();
  });
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::unassigned: return "";
  }
  return "";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  if (text.empty() || text == "unassigned") return Split::unassigned;
  fail(ErrorCode::InvalidArgument, "unknown split '" + std::string(text) + "'");
}

std::size_t DatasetManifest::count(int class_id, Split split) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const SampleRecord& r) {
    return r.class_id == class_id && r.split == split;
  }));
}

std::vector<std::size_t> DatasetManifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

const std::vector<std::string>& tem_virus_class_names() {
  static const std::vector<std::string> names = {"Ad", "As", "CC", "Cp", "Eb", "If", "Ls",
                                                 "Mb", "Np", "Nr", "Or", "Pl", "RV", "Rt"};
  return names;
}

DatasetManifest build_manifest(const fs::path& root, std::size_t expected_classes) {
  if (!fs::is_directory(root)) fail(ErrorCode::Io, root.string() + " is not a directory");
  DatasetManifest m;
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  if (class_dirs.size() != expected_classes) {
    fail(ErrorCode::ClassCountMismatch, root.string() + " holds " + std::to_string(class_dirs.size()) +
                                            " class directories, expected " + std::to_string(expected_classes));
  }
  std::sort(class_dirs.begin(), class_dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  for (std::size_t id = 0; id < class_dirs.size(); ++id) {
    m.class_names.push_back(class_dirs[id].filename().string());
    for (const auto& entry : fs::directory_iterator(class_dirs[id])) {
      if (entry.is_regular_file()) m.records.push_back({entry.path(), static_cast<int>(id), Split::unassigned});
    }
  }
  sort_records(m.records);
  return m;
}

DatasetManifest split_stratified(const DatasetManifest& m, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "train_fraction must lie in (0, 1)");
  }
  DatasetManifest out = m;
  sort_records(out.records);

  std::size_t begin = 0;
  while (begin < out.records.size()) {
    const int cls = out.records[begin].class_id;
    std::size_t end = begin;
    while (end < out.records.size() && out.records[end].class_id == cls) ++end;

    std::vector<std::size_t> order(end - begin);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = begin + i;
    Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    shuffle(std::span(order), rng);

    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(order.size())));
    for (std::size_t i = 0; i < order.size(); ++i) {
      out.records[order[i]].split = i < n_train ? Split::train : Split::test;
    }
    begin = end;
  }
  return out;
}

void write_manifest_csv(const fs::path& file, const DatasetManifest& m) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + file.string() + " for writing");
  const fs::path base = fs::absolute(file).parent_path();
  out << "# classes: ";
  for (std::size_t i = 0; i < m.class_names.size(); ++i) out << (i ? ";" : "") << m.class_names[i];
  out << "\npath,class_id,split\n";
  for (const auto& r : m.records) {
    fs::path p = r.path;
    if (p.is_absolute()) {
      const fs::path rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    out << csv_quote(p.generic_string()) << ',' << r.class_id << ',' << to_string(r.split) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + file.string());
}

DatasetManifest read_manifest_csv(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + file.string());
  const fs::path base = fs::absolute(file).parent_path();
  DatasetManifest m;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  int max_class = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# classes:", 0) == 0) {
      std::stringstream ss(line.substr(10));
      std::string name;
      while (std::getline(ss, name, ';')) {
        name.erase(0, name.find_first_not_of(' '));
        if (!name.empty()) m.class_names.push_back(name);
      }
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      if (line != "path,class_id,split") fail(ErrorCode::CorruptFile, file.string() + ": expected header path,class_id,split");
      header_seen = true;
      continue;
    }
    const auto fields = csv_split(line);
    if (fields.size() != 3) fail(ErrorCode::CorruptFile, file.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    SampleRecord r;
    r.path = fs::path(fields[0]);
    if (r.path.is_relative()) r.path = base / r.path;
    try {
      r.class_id = std::stoi(fields[1]);
    } catch (...) {
      fail(ErrorCode::CorruptFile, file.string() + ":" + std::to_string(line_no) + ": bad class_id");
    }
    if (r.class_id < 0) fail(ErrorCode::CorruptFile, file.string() + ":" + std::to_string(line_no) + ": negative class_id");
    r.split = parse_split(fields[2]);
    max_class = std::max(max_class, r.class_id);
    m.records.push_back(std::move(r));
  }
  if (!header_seen) fail(ErrorCode::CorruptFile, file.string() + ": missing header");
  if (m.class_names.empty()) {
    for (int c = 0; c <= max_class; ++c) m.class_names.push_back("class" + std::to_string(c));
  }
  if (max_class >= static_cast<int>(m.class_names.size())) {
    fail(ErrorCode::CorruptFile, file.string() + ": class_id exceeds the class list");
  }
  sort_records(m.records);
  return m;
}

}  // namespace temviro
