#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "snake/snake.hpp"

namespace snake {

inline constexpr std::size_t kMaxIndexDim = 8;

/// Uniform-grid hash of a point cloud. Each point lands in exactly one cell;
/// neighbour queries inspect the 3^d cells around the query point, so the
/// query radius must not exceed the cell size.
class SpatialIndex {
 public:
  using Key = std::array<std::int32_t, kMaxIndexDim>;

  SpatialIndex(const PointCloud& cloud, double cell);
  SpatialIndex(std::size_t dimension, std::span<const double> coords, double cell);

  std::size_t dimension() const { return d_; }
  std::size_t size() const { return ids_.size(); }
  double cell_size() const { return cell_; }
  std::size_t occupied_cells() const { return cells_.size(); }

  bool any_within(std::span<const double> x, double r) const;
  std::size_t count_within(std::span<const double> x, double r) const;
  std::vector<std::size_t> indices_within(std::span<const double> x, double r) const;
  // Nearest point other than `skip` within max_rings rings of cells; +inf if none.
  double nearest_distance(std::span<const double> x, std::size_t skip = std::numeric_limits<std::size_t>::max(),
                          int max_rings = 2) const;

  // Calls f(original_index, squared_distance) for every point within r.
  template <class F>
  void for_each_within(std::span<const double> x, double r, F&& f) const;

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  struct Range {
    std::uint32_t begin, end;
  };

  Key key_of(std::span<const double> x) const;
  void build(std::span<const double> coords);
  template <class F>
  bool visit_ring(const Key& center, int ring, F&& f) const;

  std::size_t d_ = 0;
  double cell_ = 0.0;
  std::vector<double> coords_;        // sorted by cell
  std::vector<std::uint32_t> ids_;    // original index of each sorted point
  std::unordered_map<Key, Range, KeyHash> cells_;
};

// ---------------------------------------------------------------------------

template <class F>
bool SpatialIndex::visit_ring(const Key& center, int ring, F&& f) const {
  // Enumerates cells at Chebyshev distance exactly `ring`; f returns true to stop.
  std::array<int, kMaxIndexDim> off{};
  const int span = 2 * ring + 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < d_; ++i) total *= static_cast<std::size_t>(span);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    int cheb = 0;
    for (std::size_t i = 0; i < d_; ++i) {
      off[i] = static_cast<int>(c % static_cast<std::size_t>(span)) - ring;
      c /= static_cast<std::size_t>(span);
      cheb = std::max(cheb, std::abs(off[i]));
    }
    if (cheb != ring) continue;
    Key k = center;
    for (std::size_t i = 0; i < d_; ++i) k[i] += off[i];
    auto it = cells_.find(k);
    if (it == cells_.end()) continue;
    if (f(it->second)) return true;
  }
  return false;
}

template <class F>
void SpatialIndex::for_each_within(std::span<const double> x, double r, F&& f) const {
  const double r2 = r * r;
  const Key c = key_of(x);
  auto scan = [&](const Range& rg) {
    for (std::uint32_t j = rg.begin; j < rg.end; ++j) {
      const double* p = coords_.data() + static_cast<std::size_t>(j) * d_;
      double s = 0.0;
      for (std::size_t i = 0; i < d_; ++i) s += (p[i] - x[i]) * (p[i] - x[i]);
      if (s <= r2) f(static_cast<std::size_t>(ids_[j]), s);
    }
    return false;
  };
  const int rings = static_cast<int>(std::ceil(r / cell_ - 1e-12));
  for (int ring = 0; ring <= std::max(rings, 1); ++ring) visit_ring(c, ring, scan);
}

}  // namespace snake
