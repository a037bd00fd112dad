#include "snake/excursion.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <stdexcept>

namespace snake {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}

double duration_mass(double r_min, double r_max) {
  return kInvSqrt2Pi * (1.0 / std::sqrt(r_min) - 1.0 / std::sqrt(r_max));
}

double duration_tail_mass(double r) { return kInvSqrt2Pi / std::sqrt(r); }

double excursion_max_tail(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k < 400; ++k) {
    const double kx2 = static_cast<double>(k) * k * x * x;
    const double term = (4.0 * kx2 - 1.0) * std::exp(-2.0 * kx2);
    sum += term;
    if (std::exp(-2.0 * kx2) < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double height_mass_between(double t, double lo, double hi) {
  if (!(t > 0.0) || lo < 0.0 || hi < lo) throw std::invalid_argument("height_mass_between: bad arguments");
  // x = t / sqrt(r) maps the duration window onto the excursion-max variable.
  const double x_lo = std::isinf(hi) ? 0.0 : t / std::sqrt(hi);
  const double x_hi = lo == 0.0 ? 12.0 : std::min(12.0, t / std::sqrt(lo));
  if (x_hi <= x_lo) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double integral =
      gauss_kronrod<double, 31>::integrate(excursion_max_tail, x_lo, x_hi, 20, 1e-13, &err);
  return 2.0 * kItoDensity / t * integral;
}

std::int32_t LifetimePath::max_level() const {
  return levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end());
}

std::vector<double> LifetimePath::values() const {
  std::vector<double> v(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) v[i] = value(i);
  return v;
}

bool LifetimePath::satisfies_invariants() const {
  if (levels.size() < 3 || levels.size() % 2 == 0) return false;
  if (levels.front() != 0 || levels.back() != 0) return false;
  for (std::size_t i = 1; i + 1 < levels.size(); ++i)
    if (levels[i] <= 0) return false;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    if (std::abs(levels[i + 1] - levels[i]) != 1) return false;
  return std::abs(height_unit - std::sqrt(contour_step)) <= 1e-12 * height_unit;
}

std::size_t Resolution::half_steps_for(double r) const {
  const double n = std::ceil(r / (2.0 * contour_step));
  if (!(n < static_cast<double>(n_max))) return n_max;
  return std::max(n_min, static_cast<std::size_t>(n));
}

LifetimePath sample_normalized_excursion(std::size_t n, Stream& rng) {
  if (n == 0) throw std::invalid_argument("sample_normalized_excursion: n must be >= 1");
  // Interior Dyck path of length 2m via the cycle lemma on m ups and m+1 downs.
  const std::size_t m = n - 1;
  std::vector<std::int8_t> steps(2 * m + 1, -1);
  std::fill(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(m), std::int8_t{1});
  std::shuffle(steps.begin(), steps.end(), rng.engine());
  std::int64_t s = 0, best = 0;
  std::size_t argmin = 0;  // rotation starts right after the first minimum
  for (std::size_t i = 0; i < steps.size(); ++i) {
    s += steps[i];
    if (s < best) {
      best = s;
      argmin = i + 1;
    }
  }
  LifetimePath p;
  p.levels.resize(2 * n + 1);
  p.levels[0] = 0;
  p.levels[1] = 1;
  std::int32_t level = 1;
  for (std::size_t j = 0; j < 2 * m; ++j) {
    level += steps[(argmin + j) % steps.size()];
    p.levels[j + 2] = level;
  }
  p.levels[2 * n] = 0;
  p.contour_step = 1.0 / (2.0 * static_cast<double>(n));
  p.height_unit = std::sqrt(p.contour_step);
  return p;
}

LifetimePath scale_duration(const LifetimePath& path, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale_duration: factor must be positive");
  LifetimePath p = path;
  p.contour_step = path.contour_step * factor;
  p.height_unit = path.height_unit * std::sqrt(factor);
  return p;
}

LifetimePath rescale(const LifetimePath& path, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("rescale: r must be positive");
  if (std::abs(path.duration() - 1.0) > 1e-12) throw std::invalid_argument("rescale: path must have duration 1");
  return scale_duration(path, r);
}

DurationSample sample_duration(double r_min, double r_max, Stream& rng, std::size_t draws) {
  if (!(r_min > 0.0) || r_max < r_min || draws == 0)
    throw std::invalid_argument("sample_duration: need 0 < r_min <= r_max");
  const double a = 1.0 / std::sqrt(r_min), b = 1.0 / std::sqrt(r_max);
  const double u = rng.uniform();
  const double x = a - u * (a - b);
  DurationSample d;
  d.duration = r_min == r_max ? r_min : 1.0 / (x * x);
  d.importance_weight = duration_mass(r_min, r_max) / static_cast<double>(draws);
  d.r_min = r_min;
  d.r_max = r_max;
  return d;
}

HeightConditioned condition_height(double t_min, double r_min, double r_max,
                                   const Resolution& res, Stream& rng, std::size_t max_tries) {
  if (!(t_min > 0.0)) throw std::invalid_argument("condition_height: t_min must be positive");
  const double mass = duration_mass(r_min, r_max);
  for (std::size_t k = 1; k <= max_tries; ++k) {
    const double r = sample_duration(r_min, r_max, rng).duration;
    LifetimePath p = sample_normalized_excursion(res.half_steps_for(r), rng);
    if (p.max_value() * std::sqrt(r) > t_min) {
      HeightConditioned out;
      out.path = rescale(p, r);
      out.weight = mass / static_cast<double>(k);
      out.tries = k;
      return out;
    }
  }
  throw std::runtime_error("condition_height: max_tries exhausted (r_max too small for t_min?)");
}

HeightMassEstimate estimate_height_mass(double t_min, double r_min, double r_max,
                                        const Resolution& res, std::size_t draws,
                                        std::uint64_t seed) {
  if (!(t_min > 0.0) || draws == 0) throw std::invalid_argument("estimate_height_mass: bad arguments");
  const double mass = duration_mass(r_min, r_max);
  std::vector<unsigned char> hit(draws, 0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < draws; ++i) {
    Stream rng(seed, i);
    const double r = sample_duration(r_min, r_max, rng).duration;
    const LifetimePath p = sample_normalized_excursion(res.half_steps_for(r), rng);
    hit[i] = p.max_value() * std::sqrt(r) > t_min;
  }
  HeightMassEstimate e;
  e.draws = draws;
  for (unsigned char h : hit) e.accepted += h;
  const double p = static_cast<double>(e.accepted) / static_cast<double>(draws);
  e.estimate = mass * p;
  e.stderr_ = mass * std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
  e.upper_tail_bound = duration_tail_mass(r_max);
  e.lower_tail_mass = height_mass_between(t_min, 0.0, r_min);
  return e;
}

LevelBand local_time_band(const LifetimePath& path, double t, double delta) {
  if (t < 0.0 || !(delta > 0.0)) throw std::invalid_argument("local_time_band: need t >= 0, delta > 0");
  LevelBand band;
  band.weight = path.contour_step / delta;
  const double hi = t + delta;
  for (std::size_t i = 0; i < path.step_count(); ++i) {
    const double z = path.value(i);
    if (z >= t && z < hi) band.indices.push_back(i);
  }
  return band;
}

}  // namespace snake
