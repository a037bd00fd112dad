#include "snake/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "snake/rng.hpp"

namespace snake {

std::size_t SpatialIndex::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::int32_t v : k) h = mix64(h ^ static_cast<std::uint32_t>(v));
  return static_cast<std::size_t>(h);
}

SpatialIndex::SpatialIndex(const PointCloud& cloud, double cell)
    : SpatialIndex(cloud.dimension(), cloud.coords(), cell) {}

SpatialIndex::SpatialIndex(std::size_t dimension, std::span<const double> coords, double cell)
    : d_(dimension), cell_(cell) {
  if (d_ == 0 || d_ > kMaxIndexDim) throw std::invalid_argument("SpatialIndex: dimension must be 1..8");
  if (!(cell > 0.0)) throw std::invalid_argument("SpatialIndex: cell size must be positive");
  build(coords);
}

SpatialIndex::Key SpatialIndex::key_of(std::span<const double> x) const {
  Key k{};
  for (std::size_t i = 0; i < d_; ++i) {
    const double c = std::floor(x[i] / cell_);
    if (std::abs(c) > 2.0e9) throw std::out_of_range("SpatialIndex: coordinate out of grid range");
    k[i] = static_cast<std::int32_t>(c);
  }
  return k;
}

void SpatialIndex::build(std::span<const double> coords) {
  const std::size_t n = coords.size() / d_;
  if (n >= std::numeric_limits<std::uint32_t>::max()) throw std::length_error("SpatialIndex: too many points");
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = key_of(coords.subspan(i * d_, d_));
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return keys[a] < keys[b] || (keys[a] == keys[b] && a < b);
  });
  coords_.resize(n * d_);
  ids_.resize(n);
  cells_.reserve(n / 2 + 1);
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint32_t i = order[j];
    ids_[j] = i;
    std::copy_n(coords.begin() + static_cast<std::ptrdiff_t>(i * d_), d_, coords_.begin() + static_cast<std::ptrdiff_t>(j * d_));
    auto [it, inserted] = cells_.try_emplace(keys[i], Range{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j + 1)});
    if (!inserted) it->second.end = static_cast<std::uint32_t>(j + 1);
  }
}

bool SpatialIndex::any_within(std::span<const double> x, double r) const {
  if (r > cell_ * (1.0 + 1e-12)) throw std::invalid_argument("SpatialIndex::any_within: radius exceeds cell size");
  const double r2 = r * r;
  const Key c = key_of(x);
  auto scan = [&](const Range& rg) {
    for (std::uint32_t j = rg.begin; j < rg.end; ++j) {
      const double* p = coords_.data() + static_cast<std::size_t>(j) * d_;
      double s = 0.0;
      for (std::size_t i = 0; i < d_; ++i) s += (p[i] - x[i]) * (p[i] - x[i]);
      if (s <= r2) return true;
    }
    return false;
  };
  return visit_ring(c, 0, scan) || visit_ring(c, 1, scan);
}

std::size_t SpatialIndex::count_within(std::span<const double> x, double r) const {
  std::size_t n = 0;
  for_each_within(x, r, [&](std::size_t, double) { ++n; });
  return n;
}

std::vector<std::size_t> SpatialIndex::indices_within(std::span<const double> x, double r) const {
  std::vector<std::size_t> out;
  for_each_within(x, r, [&](std::size_t i, double) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

double SpatialIndex::nearest_distance(std::span<const double> x, std::size_t skip, int max_rings) const {
  const Key c = key_of(x);
  double best2 = std::numeric_limits<double>::infinity();
  auto scan = [&](const Range& rg) {
    for (std::uint32_t j = rg.begin; j < rg.end; ++j) {
      if (ids_[j] == skip) continue;
      const double* p = coords_.data() + static_cast<std::size_t>(j) * d_;
      double s = 0.0;
      for (std::size_t i = 0; i < d_; ++i) s += (p[i] - x[i]) * (p[i] - x[i]);
      best2 = std::min(best2, s);
    }
    return false;
  };
  for (int ring = 0; ring <= max_rings; ++ring) {
    visit_ring(c, ring, scan);
    // Every point in a farther ring is at least ring * cell away.
    const double reach = ring * cell_;
    if (best2 <= reach * reach) break;
  }
  return std::sqrt(best2);
}

}  // namespace snake
