#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "snake/snake.hpp"

namespace snake {

// SNKC point-cloud cache:
//   "SNKC" | u32 version | u8 dimension | u64 count | count*d f64 | u32 length | provenance bytes
// All integers and floats little-endian.
inline constexpr std::uint32_t kCloudFormatVersion = 1;

void cache_cloud(const PointCloud& cloud, const std::filesystem::path& path);

// Throws std::runtime_error on bad magic, version, truncation, or when
// expected_dimension is given and does not match the file.
PointCloud load_cloud(const std::filesystem::path& path,
                      std::optional<std::size_t> expected_dimension = std::nullopt);

}  // namespace snake
