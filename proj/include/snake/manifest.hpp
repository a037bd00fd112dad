#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace snake {

std::uint32_t file_crc32(const std::filesystem::path& path);

struct ArtifactEntry {
  std::string path;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::uint32_t crc32 = 0;
};

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// key = value run record. Repeated keys (criterion, artifact) keep their order.
struct RunManifest {
  std::string experiment;
  std::string code_version;
  std::uint64_t seed = 0;
  int workers = 1;
  bool deterministic = true;
  double wall_seconds = 0.0;
  std::string config_snapshot;
  std::vector<CriterionResult> criteria;
  std::vector<ArtifactEntry> artifacts;

  bool passed() const;
  void add_artifact(const std::filesystem::path& out_dir, const std::string& relative);
  std::string to_text() const;
  void write(const std::filesystem::path& path) const;
};

const char* code_version();

}  // namespace snake
