#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <fstream>

#include "snake/cloud_io.hpp"

using namespace snake;
namespace fs = std::filesystem;

namespace {
fs::path tmp(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "snake_unit";
  fs::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST(CloudIo, RoundTripIsBitExact) {
  PointCloud c(3, {0.1, -2.5, 1e-300, 3.0, 4.0, 5.0, -0.0, 1.0 / 3.0, 7e200}, "three points");
  const fs::path p = tmp("three.snkc");
  cache_cloud(c, p);
  const PointCloud back = load_cloud(p);
  ASSERT_EQ(back.dimension(), 3u);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(std::memcmp(back.coords().data(), c.coords().data(), 9 * sizeof(double)), 0);
  EXPECT_EQ(back.provenance(), "three points");
}

TEST(CloudIo, TruncatedFileThrows) {
  PointCloud c(2, std::vector<double>{1, 2, 3, 4, 5, 6});
  const fs::path p = tmp("trunc.snkc");
  cache_cloud(c, p);
  fs::resize_file(p, fs::file_size(p) - 9);
  EXPECT_THROW(load_cloud(p), std::runtime_error);
}

TEST(CloudIo, BadMagicThrows) {
  const fs::path p = tmp("magic.snkc");
  std::ofstream(p, std::ios::binary) << "NOPE0000000000000000";
  EXPECT_THROW(load_cloud(p), std::runtime_error);
}

TEST(CloudIo, DimensionMismatchThrows) {
  PointCloud c(2, std::vector<double>{1, 2});
  const fs::path p = tmp("dim.snkc");
  cache_cloud(c, p);
  EXPECT_NO_THROW(load_cloud(p, 2));
  try {
    load_cloud(p, 5);
    FAIL() << "expected a dimension error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("dimension"), std::string::npos);
  }
}

TEST(CloudIo, EmptyCloud) {
  PointCloud c(4);
  const fs::path p = tmp("empty.snkc");
  cache_cloud(c, p);
  const PointCloud back = load_cloud(p, 4);
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back.dimension(), 4u);
}
