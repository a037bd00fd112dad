#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "snake/excursion.hpp"
#include "snake/rng.hpp"

namespace snake {

class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::size_t dimension, std::string provenance = {})
      : dim_(dimension), provenance_(std::move(provenance)) {}
  PointCloud(std::size_t dimension, std::vector<double> coords, std::string provenance = {});

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return dim_ ? coords_.size() / dim_ : 0; }
  bool empty() const { return coords_.empty(); }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  const std::vector<double>& coords() const { return coords_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  void push(std::span<const double> x);
  void append(const PointCloud& other);
  void scale(double factor);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::string provenance_;
};

// Removes exact duplicate points (lexicographic sort).
PointCloud deduplicate(const PointCloud& cloud);

/// Finite atomic measure; total mass is accumulated in insertion order.
class WeightedPointMeasure {
 public:
  WeightedPointMeasure() = default;
  explicit WeightedPointMeasure(std::size_t dimension) : dim_(dimension) {}

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }
  // compensated (Neumaier) running sum, in insertion order
  double total_mass() const { return total_ + comp_; }

  void add(std::span<const double> x, double w);
  void append(const WeightedPointMeasure& other);
  // Mass of the atoms inside a ball.
  double mass_in_ball(std::span<const double> center, double radius) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
  double total_ = 0.0;
  double comp_ = 0.0;
};

// Merges atoms at identical positions, summing weights.
WeightedPointMeasure merge_atoms(const WeightedPointMeasure& mu);
PointCloud support_cloud(const WeightedPointMeasure& mu);

struct SnakeRealization {
  LifetimePath lifetime;
  std::size_t dimension = 0;
  std::vector<double> root;
  std::vector<double> tips;        // (2n+1) x d
  std::vector<double> increments;  // n x d, in up-step order
  double spatial_scale = 1.0;      // increments ~ N(0, scale^2 sqrt(ds))

  std::size_t tip_count() const { return lifetime.levels.size(); }
  std::span<const double> tip(std::size_t i) const { return {tips.data() + i * dimension, dimension}; }
  double duration() const { return lifetime.duration(); }
};

// Runs the discrete snake: an up-step pushes a fresh N(0, sqrt(ds) I_d) increment,
// a down-step pops back to the tip last seen at the new level.
SnakeRealization run_snake(const LifetimePath& lifetime, std::span<const double> x0, Stream& rng);

// Streams tips without storing them: visit(i, tip) for i = 0..2n. A visitor returning
// bool stops the walk early on false.
template <class Visit>
void walk_snake(const LifetimePath& lifetime, std::span<const double> x0, Stream& rng, Visit&& visit);

// Rebuilds tips from root, lifetime and stored increments.
std::vector<double> replay_tips(const SnakeRealization& s);

PointCloud range_cloud(const SnakeRealization& s, bool deduplicate = false);
WeightedPointMeasure occupation(const SnakeRealization& s, double t_lo, double t_hi);
WeightedPointMeasure y_slice(const SnakeRealization& s, double t, double delta);

SnakeRealization ise_transform(const SnakeRealization& s);
// The scaling map W -> lambda^{-1} W_{lambda^4 s}(lambda^2 t): duration / lambda^4,
// lifetime / lambda^2, space / lambda (about the origin).
SnakeRealization scaling_transform(const SnakeRealization& s, double lambda);

struct SbmOptions {
  double r_min_factor = 1.0 / 9.0;  // r_min = factor * t_floor^2
  double r_max_factor = 1e4;        // r_max = factor * t_floor^2
  Resolution resolution;
  std::size_t max_tries = 1000000;
};

std::vector<SnakeRealization> sample_sbm(const WeightedPointMeasure& nu, double t_floor,
                                         const SbmOptions& opts, Stream& rng);
// Streaming form of sample_sbm followed by run_snake on every excursion (same random
// stream consumption): visit(excursion, contour_index, lifetime_value, tip).
template <class Visit>
void walk_sbm(const WeightedPointMeasure& nu, double t_floor, const SbmOptions& opts, Stream& rng, Visit&& visit);
// Tips with lifetime in [t, t + delta) over a streamed ensemble: a cloud approximating supp X_t.
PointCloud sbm_band_cloud(const WeightedPointMeasure& nu, double t_floor, double t, double delta,
                          const SbmOptions& opts, Stream& rng, std::size_t* excursions = nullptr);
PointCloud sbm_range_cloud(const std::vector<SnakeRealization>& snakes, double t_floor);
WeightedPointMeasure sbm_slice(const std::vector<SnakeRealization>& snakes, double t, double delta);

// ---------------------------------------------------------------------------

template <class Visit>
void walk_snake(const LifetimePath& lifetime, std::span<const double> x0, Stream& rng, Visit&& visit) {
  const std::size_t d = x0.size();
  const std::size_t steps = lifetime.step_count();
  const double sd = std::sqrt(lifetime.height_unit);
  // stack[k] = tip at lattice level k along the current path
  std::vector<double> stack(static_cast<std::size_t>(lifetime.max_level() + 1) * d);
  std::copy(x0.begin(), x0.end(), stack.begin());
  auto call = [&](std::size_t i, const double* p) {
    if constexpr (std::is_same_v<decltype(visit(i, std::span<const double>(p, d))), bool>)
      return visit(i, std::span<const double>(p, d));
    else {
      visit(i, std::span<const double>(p, d));
      return true;
    }
  };
  if (!call(0, stack.data())) return;
  for (std::size_t i = 0; i < steps; ++i) {
    const auto next = static_cast<std::size_t>(lifetime.levels[i + 1]);
    double* dst = stack.data() + next * d;
    if (lifetime.up_step(i)) {
      const double* src = dst - d;
      for (std::size_t c = 0; c < d; ++c) dst[c] = src[c] + sd * rng.normal();
    }
    if (!call(i + 1, dst)) return;
  }
}

template <class Visit>
void walk_sbm(const WeightedPointMeasure& nu, double t_floor, const SbmOptions& opts, Stream& rng, Visit&& visit) {
  if (nu.empty() || !(nu.total_mass() > 0.0)) throw std::invalid_argument("walk_sbm: empty initial measure");
  if (!(t_floor > 0.0)) throw std::invalid_argument("walk_sbm: t_floor must be positive");
  const std::size_t k = rng.poisson(nu.total_mass() / (2.0 * t_floor));
  std::vector<double> cdf(nu.size());
  std::partial_sum(nu.weights().begin(), nu.weights().end(), cdf.begin());
  const double t2 = t_floor * t_floor;
  for (std::size_t j = 0; j < k; ++j) {
    const double u = rng.uniform() * cdf.back();
    const auto atom = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const auto cond = condition_height(t_floor, opts.r_min_factor * t2, opts.r_max_factor * t2, opts.resolution, rng,
                                       opts.max_tries);
    const LifetimePath& life = cond.path;
    walk_snake(life, nu.point(std::min(atom, nu.size() - 1)), rng,
               [&](std::size_t i, std::span<const double> tip) { visit(j, i, life.value(i), tip); });
  }
}

}  // namespace snake
