#include "snake/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snake {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("config: cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
  Config c;
  std::set<std::string> stack{std::filesystem::weakly_canonical(path).string()};
  c.parse(read_file(path), path.parent_path(), stack);
  return c;
}

Config Config::from_string(const std::string& text, const std::filesystem::path& base_dir) {
  Config c;
  std::set<std::string> stack;
  c.parse(text, base_dir, stack);
  return c;
}

void Config::parse(const std::string& text, const std::filesystem::path& base_dir, std::set<std::string>& stack) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("include ", 0) == 0) {
      const std::filesystem::path p = base_dir / trim(t.substr(8));
      const std::string key = std::filesystem::weakly_canonical(p).string();
      if (stack.count(key)) throw std::runtime_error("config: include cycle at " + p.string());
      stack.insert(key);
      parse(read_file(p), p.parent_path(), stack);
      stack.erase(key);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw std::runtime_error("config: line " + std::to_string(lineno) + ": empty key");
    entries_[key] = trim(t.substr(eq + 1));
  }
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != it->second.size()) throw std::invalid_argument("config: " + key + " is not a number");
  return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const double v = get_double(key, 0.0);
  if (v != static_cast<double>(static_cast<std::int64_t>(v)))
    throw std::invalid_argument("config: " + key + " is not an integer");
  return static_cast<std::int64_t>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw std::invalid_argument("config: " + key + " is not a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    Config tmp;
    tmp.set("v", trim(item));
    out.push_back(tmp.get_double("v", 0.0));
  }
  if (out.empty()) throw std::invalid_argument("config: " + key + " is an empty list");
  return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
  std::string bad;
  for (const auto& [k, v] : entries_)
    if (!allowed.count(k)) bad += (bad.empty() ? "" : ", ") + k;
  if (!bad.empty()) throw std::invalid_argument("config: unknown keys: " + bad);
}

std::string Config::snapshot() const {
  std::string s;
  for (const auto& [k, v] : entries_) s += k + " = " + v + "\n";
  return s;
}

}  // namespace snake
