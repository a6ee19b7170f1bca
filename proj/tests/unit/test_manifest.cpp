#include <gtest/gtest.h>

#include <fstream>

#include "temviro/manifest.hpp"
#include "test_support.hpp"

using namespace temviro;
namespace fs = std::filesystem;

namespace {

void touch(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << "x";
}

// class a: 4 files, b: 7 files, c: 1 file
void make_tree(const fs::path& root) {
  for (int i = 0; i < 4; ++i) touch(root / "a" / ("img" + std::to_string(i) + ".pgm"));
  for (int i = 0; i < 7; ++i) touch(root / "b" / ("img" + std::to_string(i) + ".pgm"));
  touch(root / "c" / "only.pgm");
}

}  // namespace

TEST(Manifest, BuildSortsClassesAndRecords) {
  testing_support::TempDir dir("manifest");
  make_tree(dir.path());
  const auto m = build_manifest(dir.path(), 3);
  EXPECT_EQ(m.class_names, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(m.records.size(), 12u);
  for (std::size_t i = 1; i < m.records.size(); ++i) {
    const auto& p = m.records[i - 1];
    const auto& q = m.records[i];
    EXPECT_TRUE(p.class_id < q.class_id || (p.class_id == q.class_id && p.path < q.path));
  }
  EXPECT_EQ(m.count(1, Split::unassigned), 7u);
}

TEST(Manifest, ClassCountMismatch) {
  testing_support::TempDir dir("manifest");
  make_tree(dir.path());
  EXPECT_TEMVIRO_ERROR(build_manifest(dir.path(), 14), ErrorCode::ClassCountMismatch);
}

TEST(Manifest, StratifiedSplitFloors) {
  testing_support::TempDir dir("manifest");
  make_tree(dir.path());
  const auto m = split_stratified(build_manifest(dir.path(), 3), 0.75, 5);
  EXPECT_EQ(m.count(0, Split::train), 3u);
  EXPECT_EQ(m.count(0, Split::test), 1u);
  EXPECT_EQ(m.count(1, Split::train), 5u);
  EXPECT_EQ(m.count(1, Split::test), 2u);
  EXPECT_EQ(m.count(2, Split::train), 0u);
  EXPECT_EQ(m.count(2, Split::test), 1u);
  EXPECT_EQ(m.indices(Split::train).size() + m.indices(Split::test).size(), 12u);
  EXPECT_EQ(split_stratified(build_manifest(dir.path(), 3), 0.75, 5), m);
}

TEST(Manifest, SplitSeedChangesAssignment) {
  testing_support::TempDir dir("manifest");
  for (int i = 0; i < 40; ++i) touch(dir / "a" / ("f" + std::to_string(i)));
  const auto base = build_manifest(dir.path(), 1);
  EXPECT_NE(split_stratified(base, 0.5, 1), split_stratified(base, 0.5, 2));
  EXPECT_TEMVIRO_ERROR(split_stratified(base, 1.0, 1), ErrorCode::InvalidArgument);
}

TEST(Manifest, CsvRoundTrip) {
  testing_support::TempDir dir("manifest");
  make_tree(dir.path());
  const auto m = split_stratified(build_manifest(dir.path(), 3), 0.75, 9);
  write_manifest_csv(dir / "manifest.csv", m);
  EXPECT_EQ(read_manifest_csv(dir / "manifest.csv"), m);
}

TEST(Manifest, CsvErrors) {
  testing_support::TempDir dir("manifest");
  std::ofstream(dir / "bad.csv") << "path,label\n";
  EXPECT_TEMVIRO_ERROR(read_manifest_csv(dir / "bad.csv"), ErrorCode::CorruptFile);
  std::ofstream(dir / "range.csv") << "# classes: a\npath,class_id,split\nx.pgm,3,train\n";
  EXPECT_TEMVIRO_ERROR(read_manifest_csv(dir / "range.csv"), ErrorCode::CorruptFile);
  EXPECT_TEMVIRO_ERROR(read_manifest_csv(dir / "missing.csv"), ErrorCode::Io);
}

TEST(Manifest, SplitNames) {
  EXPECT_EQ(parse_split("train"), Split::train);
  EXPECT_EQ(parse_split(to_string(Split::test)), Split::test);
  EXPECT_TEMVIRO_ERROR(parse_split("validation"), ErrorCode::InvalidArgument);
}

TEST(Manifest, VirusClassNames) { EXPECT_EQ(tem_virus_class_names().size(), 14u); }
