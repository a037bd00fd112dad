#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace snake {

// key = value configuration. Lines starting with '#' are comments; "include <path>"
// pulls in another file (relative to the including file); later keys override earlier.
class Config {
 public:
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text, const std::filesystem::path& base_dir = ".");

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void merge(const Config& other);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list of doubles.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  // Throws std::invalid_argument naming every key outside `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string snapshot() const;

 private:
  void parse(const std::string& text, const std::filesystem::path& base_dir, std::set<std::string>& stack);
  std::map<std::string, std::string> entries_;
};

}  // namespace snake
