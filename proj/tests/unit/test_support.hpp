#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "temviro/error.hpp"

namespace testing_support {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(TEMVIRO_TEST_DATA_DIR) / name; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "temviro_" + tag;
    if (info != nullptr) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  EXPECT_EQ(a.size(), b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename Fn>
temviro::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const temviro::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a temviro::Error";
  return temviro::ErrorCode::Io;
}

}  // namespace testing_support

#define EXPECT_TEMVIRO_ERROR(stmt, expected_code) \
  EXPECT_EQ(::testing_support::error_code_of([&] { stmt; }), (expected_code))
