#include "snake/manifest.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef SNAKE_VERSION
#define SNAKE_VERSION "dev"
#endif

namespace snake {

const char* code_version() { return SNAKE_VERSION; }

std::uint32_t file_crc32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("manifest: cannot read " + path.string());
  uLong crc = crc32(0L, Z_NULL, 0);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(got));
  }
  return static_cast<std::uint32_t>(crc);
}

bool RunManifest::passed() const {
  for (const auto& c : criteria)
    if (!c.pass) return false;
  return true;
}

void RunManifest::add_artifact(const std::filesystem::path& out_dir, const std::string& relative) {
  const auto p = out_dir / relative;
  artifacts.push_back({relative, std::filesystem::file_size(p), file_crc32(p)});
}

std::string RunManifest::to_text() const {
  std::ostringstream o;
  char buf[32];
  o << "experiment = " << experiment << "\n";
  o << "code_version = " << code_version << "\n";
  o << "seed = " << seed << "\n";
  o << "workers = " << workers << "\n";
  o << "deterministic = " << (deterministic ? "true" : "false") << "\n";
  std::snprintf(buf, sizeof buf, "%.3f", wall_seconds);
  o << "wall_seconds = " << buf << "\n";
  o << "status = " << (passed() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : criteria)
    o << "criterion = " << c.name << " " << (c.pass ? "PASS" : "FAIL") << (c.detail.empty() ? "" : " " + c.detail) << "\n";
  for (const auto& a : artifacts) {
    std::snprintf(buf, sizeof buf, "%08x", a.crc32);
    o << "artifact = " << a.path << " bytes=" << a.bytes << " crc32=" << buf << "\n";
  }
  std::istringstream cfg(config_snapshot);
  std::string line;
  while (std::getline(cfg, line))
    if (!line.empty()) o << "config." << line << "\n";
  return o.str();
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest: cannot write " + path.string());
  out << to_text();
}

}  // namespace snake
