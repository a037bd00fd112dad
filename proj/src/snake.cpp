#include "snake/snake.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace snake {

PointCloud::PointCloud(std::size_t dimension, std::vector<double> coords, std::string provenance)
    : dim_(dimension), coords_(std::move(coords)), provenance_(std::move(provenance)) {
  if (dim_ == 0 || coords_.size() % dim_ != 0) throw std::invalid_argument("PointCloud: bad coordinate array");
}

void PointCloud::push(std::span<const double> x) {
  if (x.size() != dim_) throw std::invalid_argument("PointCloud::push: dimension mismatch");
  coords_.insert(coords_.end(), x.begin(), x.end());
}

void PointCloud::append(const PointCloud& other) {
  if (other.empty()) return;
  if (other.dim_ != dim_) throw std::invalid_argument("PointCloud::append: dimension mismatch");
  coords_.insert(coords_.end(), other.coords_.begin(), other.coords_.end());
}

void PointCloud::scale(double factor) {
  for (double& c : coords_) c *= factor;
}

namespace {
std::vector<std::size_t> lex_order(const std::vector<double>& coords, std::size_t d) {
  std::vector<std::size_t> idx(d ? coords.size() / d : 0);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(coords.begin() + a * d, coords.begin() + (a + 1) * d,
                                        coords.begin() + b * d, coords.begin() + (b + 1) * d);
  });
  return idx;
}

bool same_point(const std::vector<double>& c, std::size_t d, std::size_t a, std::size_t b) {
  return std::equal(c.begin() + a * d, c.begin() + (a + 1) * d, c.begin() + b * d);
}
}  // namespace

PointCloud deduplicate(const PointCloud& cloud) {
  const std::size_t d = cloud.dimension();
  PointCloud out(d, cloud.provenance());
  const auto idx = lex_order(cloud.coords(), d);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && same_point(cloud.coords(), d, idx[k - 1], idx[k])) continue;
    out.push(cloud.point(idx[k]));
  }
  return out;
}

void WeightedPointMeasure::add(std::span<const double> x, double w) {
  if (x.size() != dim_) throw std::invalid_argument("WeightedPointMeasure::add: dimension mismatch");
  if (!(w >= 0.0)) throw std::invalid_argument("WeightedPointMeasure::add: negative weight");
  coords_.insert(coords_.end(), x.begin(), x.end());
  weights_.push_back(w);
  const double t = total_ + w;
  comp_ += std::abs(total_) >= std::abs(w) ? (total_ - t) + w : (w - t) + total_;
  total_ = t;
}

void WeightedPointMeasure::append(const WeightedPointMeasure& other) {
  for (std::size_t i = 0; i < other.size(); ++i) add(other.point(i), other.weight(i));
}

double WeightedPointMeasure::mass_in_ball(std::span<const double> center, double radius) const {
  double m = 0.0;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < size(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double diff = coords_[i * dim_ + c] - center[c];
      s += diff * diff;
    }
    if (s <= r2) m += weights_[i];
  }
  return m;
}

WeightedPointMeasure merge_atoms(const WeightedPointMeasure& mu) {
  const std::size_t d = mu.dimension();
  WeightedPointMeasure out(d);
  const auto idx = lex_order(mu.coords(), d);
  std::size_t k = 0;
  while (k < idx.size()) {
    double w = mu.weight(idx[k]);
    std::size_t j = k + 1;
    while (j < idx.size() && same_point(mu.coords(), d, idx[k], idx[j])) w += mu.weight(idx[j++]);
    out.add(mu.point(idx[k]), w);
    k = j;
  }
  return out;
}

PointCloud support_cloud(const WeightedPointMeasure& mu) {
  PointCloud c(mu.dimension());
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0.0) c.push(mu.point(i));
  return deduplicate(c);
}

SnakeRealization run_snake(const LifetimePath& lifetime, std::span<const double> x0, Stream& rng) {
  if (x0.empty()) throw std::invalid_argument("run_snake: dimension must be >= 1");
  const std::size_t d = x0.size();
  const std::size_t steps = lifetime.step_count();
  SnakeRealization s;
  s.lifetime = lifetime;
  s.dimension = d;
  s.root.assign(x0.begin(), x0.end());
  s.tips.resize((steps + 1) * d);
  s.increments.reserve(lifetime.half_steps() * d);
  const double sd = std::sqrt(lifetime.height_unit);
  // last[k] = contour index at which level k was last visited
  std::vector<std::size_t> last(static_cast<std::size_t>(lifetime.max_level() + 1), 0);
  std::copy(x0.begin(), x0.end(), s.tips.begin());
  for (std::size_t i = 0; i < steps; ++i) {
    const auto next = static_cast<std::size_t>(lifetime.levels[i + 1]);
    double* dst = s.tips.data() + (i + 1) * d;
    if (lifetime.up_step(i)) {
      const double* src = s.tips.data() + i * d;
      for (std::size_t c = 0; c < d; ++c) {
        const double g = sd * rng.normal();
        s.increments.push_back(g);
        dst[c] = src[c] + g;
      }
    } else {
      const double* src = s.tips.data() + last[next] * d;
      std::copy(src, src + d, dst);
    }
    last[next] = i + 1;
  }
  return s;
}

std::vector<double> replay_tips(const SnakeRealization& s) {
  const std::size_t d = s.dimension;
  const std::size_t steps = s.lifetime.step_count();
  std::vector<double> tips((steps + 1) * d);
  std::vector<std::size_t> last(static_cast<std::size_t>(s.lifetime.max_level() + 1), 0);
  std::copy(s.root.begin(), s.root.end(), tips.begin());
  std::size_t k = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const auto next = static_cast<std::size_t>(s.lifetime.levels[i + 1]);
    double* dst = tips.data() + (i + 1) * d;
    if (s.lifetime.up_step(i)) {
      for (std::size_t c = 0; c < d; ++c) dst[c] = tips[i * d + c] + s.increments[k++];
    } else {
      std::copy_n(tips.data() + last[next] * d, d, dst);
    }
    last[next] = i + 1;
  }
  return tips;
}

PointCloud range_cloud(const SnakeRealization& s, bool dedup) {
  PointCloud c(s.dimension);
  if (!dedup) return PointCloud(s.dimension, s.tips);
  // Distinct tips are the root plus the tip after every up-step.
  c.reserve(s.lifetime.half_steps() + 1);
  c.push(s.tip(0));
  for (std::size_t i = 0; i < s.lifetime.step_count(); ++i)
    if (s.lifetime.up_step(i)) c.push(s.tip(i + 1));
  return c;
}

WeightedPointMeasure occupation(const SnakeRealization& s, double t_lo, double t_hi) {
  if (t_lo < 0.0 || t_hi < t_lo) throw std::invalid_argument("occupation: need 0 <= t_lo <= t_hi");
  WeightedPointMeasure mu(s.dimension);
  const double ds = s.lifetime.contour_step;
  for (std::size_t i = 0; i < s.lifetime.step_count(); ++i) {
    const double z = s.lifetime.value(i);
    if (z >= t_lo && z <= t_hi) mu.add(s.tip(i), ds);
  }
  return mu;
}

WeightedPointMeasure y_slice(const SnakeRealization& s, double t, double delta) {
  const LevelBand band = local_time_band(s.lifetime, t, delta);
  WeightedPointMeasure mu(s.dimension);
  for (std::size_t i : band.indices) mu.add(s.tip(i), band.weight);
  return mu;
}

SnakeRealization ise_transform(const SnakeRealization& s) {
  if (std::abs(s.duration() - 1.0) > 1e-12) throw std::invalid_argument("ise_transform: duration must be 1");
  SnakeRealization out = s;
  const double k = std::sqrt(2.0);
  for (double& x : out.root) x *= k;
  for (double& x : out.tips) x *= k;
  for (double& x : out.increments) x *= k;
  out.spatial_scale *= k;
  return out;
}

SnakeRealization scaling_transform(const SnakeRealization& s, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scaling_transform: lambda must be positive");
  if (lambda == 1.0) return s;
  SnakeRealization out = s;
  const double l2 = lambda * lambda;
  out.lifetime = scale_duration(s.lifetime, 1.0 / (l2 * l2));
  const double k = 1.0 / lambda;
  for (double& x : out.root) x *= k;
  for (double& x : out.tips) x *= k;
  for (double& x : out.increments) x *= k;
  return out;
}

std::vector<SnakeRealization> sample_sbm(const WeightedPointMeasure& nu, double t_floor,
                                         const SbmOptions& opts, Stream& rng) {
  if (nu.empty() || !(nu.total_mass() > 0.0)) throw std::invalid_argument("sample_sbm: empty initial measure");
  if (!(t_floor > 0.0)) throw std::invalid_argument("sample_sbm: t_floor must be positive");
  const std::size_t k = rng.poisson(nu.total_mass() / (2.0 * t_floor));
  std::vector<double> cdf(nu.size());
  std::partial_sum(nu.weights().begin(), nu.weights().end(), cdf.begin());
  const double t2 = t_floor * t_floor;
  std::vector<SnakeRealization> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double u = rng.uniform() * cdf.back();
    const auto atom = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const auto cond = condition_height(t_floor, opts.r_min_factor * t2, opts.r_max_factor * t2,
                                       opts.resolution, rng, opts.max_tries);
    out.push_back(run_snake(cond.path, nu.point(std::min(atom, nu.size() - 1)), rng));
  }
  return out;
}

PointCloud sbm_band_cloud(const WeightedPointMeasure& nu, double t_floor, double t, double delta,
                          const SbmOptions& opts, Stream& rng, std::size_t* excursions) {
  if (!(t >= t_floor) || !(delta > 0.0)) throw std::invalid_argument("sbm_band_cloud: need t >= t_floor, delta > 0");
  PointCloud c(nu.dimension());
  std::size_t count = 0;
  walk_sbm(nu, t_floor, opts, rng, [&](std::size_t j, std::size_t, double z, std::span<const double> tip) {
    count = j + 1;
    if (z >= t && z < t + delta) c.push(tip);
  });
  if (excursions) *excursions = count;
  return c;
}

PointCloud sbm_range_cloud(const std::vector<SnakeRealization>& snakes, double t_floor) {
  if (snakes.empty()) return PointCloud();
  PointCloud c(snakes.front().dimension);
  for (const auto& s : snakes)
    for (std::size_t i = 0; i < s.tip_count(); ++i)
      if (s.lifetime.value(i) >= t_floor) c.push(s.tip(i));
  return c;
}

WeightedPointMeasure sbm_slice(const std::vector<SnakeRealization>& snakes, double t, double delta) {
  if (snakes.empty()) return WeightedPointMeasure();
  WeightedPointMeasure mu(snakes.front().dimension);
  for (const auto& s : snakes) mu.append(y_slice(s, t, delta));
  return mu;
}

}  // namespace snake
