#include "snake/cloud_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace snake {

namespace {

template <class T>
void put_le(std::string& buf, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U u = std::bit_cast<U>(v);
  for (std::size_t b = 0; b < sizeof(T); ++b) buf.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <class T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    if (data_.size() - pos_ < sizeof(T)) throw std::runtime_error(std::string("SNKC: truncated file reading ") + what);
    U u = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b)
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    pos_ += sizeof(T);
    return std::bit_cast<T>(u);
  }

  std::string bytes(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) throw std::runtime_error(std::string("SNKC: truncated file reading ") + what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void cache_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  if (cloud.dimension() == 0 || cloud.dimension() > 255) throw std::invalid_argument("cache_cloud: dimension must be 1..255");
  std::string buf = "SNKC";
  put_le(buf, kCloudFormatVersion);
  put_le(buf, static_cast<std::uint8_t>(cloud.dimension()));
  put_le(buf, static_cast<std::uint64_t>(cloud.size()));
  buf.reserve(buf.size() + cloud.coords().size() * 8 + cloud.provenance().size() + 4);
  for (double x : cloud.coords()) put_le(buf, x);
  put_le(buf, static_cast<std::uint32_t>(cloud.provenance().size()));
  buf += cloud.provenance();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cache_cloud: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("cache_cloud: write failed for " + path.string());
}

PointCloud load_cloud(const std::filesystem::path& path, std::optional<std::size_t> expected_dimension) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_cloud: cannot open " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));
  if (r.bytes(4, "magic") != "SNKC") throw std::runtime_error("SNKC: bad magic in " + path.string());
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCloudFormatVersion)
    throw std::runtime_error("SNKC: unsupported version " + std::to_string(version));
  const std::size_t d = r.get<std::uint8_t>("dimension");
  if (d == 0) throw std::runtime_error("SNKC: zero dimension");
  if (expected_dimension && *expected_dimension != d)
    throw std::runtime_error("SNKC: dimension mismatch (file " + std::to_string(d) + ", expected " +
                             std::to_string(*expected_dimension) + ")");
  const auto count = r.get<std::uint64_t>("count");
  if (count > r.remaining() / (8 * d)) throw std::runtime_error("SNKC: truncated file (point data)");
  std::vector<double> coords(count * d);
  for (double& x : coords) x = r.get<double>("point data");
  const auto len = r.get<std::uint32_t>("provenance length");
  std::string prov = r.bytes(len, "provenance");
  if (r.remaining() != 0) throw std::runtime_error("SNKC: trailing bytes");
  return PointCloud(d, std::move(coords), std::move(prov));
}

}  // namespace snake
