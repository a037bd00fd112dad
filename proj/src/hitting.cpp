#include "snake/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snake/stats.hpp"

namespace snake {

namespace {

constexpr double kTwoC = 2.0 * kItoDensity;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Tips of a duration-1 snake rooted at 0.
std::vector<double> normalized_tips(std::size_t n, std::size_t d, Stream& rng, LifetimePath* keep = nullptr) {
  LifetimePath path = sample_normalized_excursion(n, rng);
  std::vector<double> x0(d, 0.0), tips((2 * n + 1) * d);
  walk_snake(path, x0, rng, [&](std::size_t i, std::span<const double> t) {
    std::copy(t.begin(), t.end(), tips.begin() + static_cast<std::ptrdiff_t>(i * d));
  });
  if (keep) *keep = std::move(path);
  return tips;
}

// Sorted, merged union of intervals.
std::vector<ScaleInterval> merge(std::vector<ScaleInterval> v) {
  std::sort(v.begin(), v.end(), [](const ScaleInterval& a, const ScaleInterval& b) { return a.lo < b.lo; });
  std::vector<ScaleInterval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, iv.hi);
    else out.push_back(iv);
  }
  return out;
}

std::vector<ScaleInterval> tip_intervals(const std::vector<double>& tips, std::size_t count, std::size_t d,
                                         std::span<const double> center, double radius) {
  std::vector<ScaleInterval> v;
  for (std::size_t i = 0; i < count; ++i) {
    const ScaleInterval iv = scale_interval({tips.data() + i * d, d}, center, radius);
    if (iv.lo < iv.hi) v.push_back(iv);
  }
  return v;
}

// 4c int lambda^{-3} over the union, restricted to [a, b].
double hit_mass(const std::vector<ScaleInterval>& merged, double a = 0.0, double b = INFINITY) {
  double m = 0.0;
  for (const auto& iv : merged) {
    const double lo = std::max(iv.lo, a), hi = std::min(iv.hi, b);
    if (lo < hi) m += kTwoC * (1.0 / (lo * lo) - (std::isfinite(hi) ? 1.0 / (hi * hi) : 0.0));
  }
  return m;
}

struct MomentPair {
  double first = 0.0;
  double second = 0.0;
};

// Scale-integrated first and second occupation moments of one duration-1 snake with
// contour step ds, restricted to lambda in [a, b].
MomentPair occupation_pair(const std::vector<ScaleInterval>& ivs, double ds, double a = 0.0, double b = INFINITY) {
  std::vector<std::pair<double, int>> ev;
  ev.reserve(2 * ivs.size());
  for (const auto& iv : ivs) {
    const double lo = std::max(iv.lo, a), hi = std::min(iv.hi, b);
    if (lo < hi) {
      ev.emplace_back(lo, +1);
      ev.emplace_back(hi, -1);
    }
  }
  std::sort(ev.begin(), ev.end());
  MomentPair m;
  int k = 0;
  for (std::size_t e = 0; e + 1 <= ev.size(); ++e) {
    k += ev[e].second;
    if (e + 1 == ev.size()) break;
    const double lo = ev[e].first, hi = ev[e + 1].first;
    if (k > 0 && hi > lo) {
      const double kk = static_cast<double>(k);
      // 4c ds int lambda^{1} K  and  4c ds^2 int lambda^5 K^2
      m.first += 2.0 * kTwoC * ds * kk * 0.5 * (hi * hi - lo * lo);
      m.second += 2.0 * kTwoC * ds * ds * kk * kk * (std::pow(hi, 6) - std::pow(lo, 6)) / 6.0;
    }
  }
  return m;
}

void check_ball(const Ball& A) {
  if (!(A.radius > 0.0) || A.center.empty()) throw std::invalid_argument("occupation moments: bad ball");
  if (norm(A.center) <= A.radius) throw std::invalid_argument("occupation moments: ball must not contain the root");
}

MassEstimate from_values(const std::vector<double>& v) {
  const Estimate e = mean_estimate(v);
  MassEstimate m;
  m.estimate = e.value;
  m.stderr_ = e.stderr_;
  m.samples = v.size();
  for (double x : v) m.hits += x > 0.0;
  return m;
}

}  // namespace

ScaleInterval scale_interval(std::span<const double> t, std::span<const double> center, double radius) {
  double tt = 0.0, tc = 0.0, cc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    tt += t[i] * t[i];
    tc += t[i] * center[i];
    cc += center[i] * center[i];
  }
  const double q = cc - radius * radius;
  if (!(q > 0.0)) throw std::invalid_argument("scale_interval: ball contains the origin");
  if (tt == 0.0 || tc <= 0.0) return {};
  const double disc = tc * tc - tt * q;
  if (disc < 0.0) return {};
  const double s = std::sqrt(disc);
  return {q / (tc + s), (tc + s) / tt};
}

MassEstimate hitting_prob_mc(std::span<const double> y, double eps, std::size_t M, std::uint64_t seed,
                             const HittingOptions& opts) {
  const std::size_t d = y.size();
  const double dist = norm(y);
  if (!(eps > 0.0) || !(dist > eps)) throw std::invalid_argument("hitting_prob_mc: need 0 < eps < |y|");
  if (M == 0) throw std::invalid_argument("hitting_prob_mc: M must be >= 1");
  const double mass = duration_mass(opts.r_min, opts.r_max);
  std::vector<unsigned char> hit(M, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < M; ++i) {
    Stream rng(seed, i);
    const DurationSample s = sample_duration(opts.r_min, opts.r_max, rng, M);
    const LifetimePath path = rescale(sample_normalized_excursion(opts.resolution.half_steps_for(s.duration), rng),
                                      s.duration);
    const std::vector<double> x0(d, 0.0);
    const double e2 = eps * eps;
    walk_snake(path, x0, rng, [&](std::size_t, std::span<const double> t) {
      double s2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) s2 += (t[c] - y[c]) * (t[c] - y[c]);
      if (s2 <= e2) {
        hit[i] = 1;
        return false;
      }
      return true;
    });
  }
  MassEstimate m;
  m.samples = M;
  for (unsigned char h : hit) m.hits += h;
  const double p = static_cast<double>(m.hits) / static_cast<double>(M);
  m.estimate = mass * p;
  m.stderr_ = mass * std::sqrt(p * (1.0 - p) / static_cast<double>(M));
  m.upper_tail = duration_tail_mass(opts.r_max);
  // Reaching B(y, eps) needs reach >= |y| - eps, i.e. lambda >= (|y| - eps) / R for a
  // normalized snake of reach R; integrate lambda below r_min^{1/4}.
  const double reach_needed = dist - eps;
  const double cut = std::pow(opts.r_min, 0.25);
  std::vector<double> tail(opts.pilot, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t j = 0; j < opts.pilot; ++j) {
    Stream rng(derive_seed(seed, 0x7a11), j);
    const std::vector<double> tips = normalized_tips(opts.pilot_half_steps, d, rng);
    double R = 0.0;
    for (std::size_t i = 0; i < tips.size() / d; ++i) R = std::max(R, norm({tips.data() + i * d, d}));
    const double lam = reach_needed / R;
    if (lam < cut) tail[j] = kTwoC * (1.0 / (lam * lam) - 1.0 / (cut * cut));
  }
  if (opts.pilot > 0) {
    const Estimate e = mean_estimate(tail);
    m.lower_tail = e.value + 3.0 * e.stderr_;
  }
  return m;
}

MassEstimate hitting_prob_scaled(std::span<const double> y, double eps, std::size_t n, std::size_t M,
                                 std::uint64_t seed) {
  const std::size_t d = y.size();
  if (!(eps > 0.0) || !(norm(y) > eps)) throw std::invalid_argument("hitting_prob_scaled: need 0 < eps < |y|");
  if (M == 0 || n == 0) throw std::invalid_argument("hitting_prob_scaled: need n, M >= 1");
  std::vector<double> v(M, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t j = 0; j < M; ++j) {
    Stream rng(seed, j);
    const std::vector<double> tips = normalized_tips(n, d, rng);
    v[j] = hit_mass(merge(tip_intervals(tips, 2 * n + 1, d, y, eps)));
  }
  return from_values(v);
}

OccupationMoments occupation_moments_scaled(const Ball& A, std::size_t n, std::size_t M, std::uint64_t seed) {
  check_ball(A);
  if (M == 0 || n == 0) throw std::invalid_argument("occupation_moments_scaled: need n, M >= 1");
  const std::size_t d = A.dimension();
  const double ds = 1.0 / (2.0 * static_cast<double>(n));
  std::vector<double> v1(M), v2(M);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t j = 0; j < M; ++j) {
    Stream rng(seed, j);
    const std::vector<double> tips = normalized_tips(n, d, rng);
    const MomentPair m = occupation_pair(tip_intervals(tips, 2 * n, d, A.center, A.radius), ds);
    v1[j] = m.first;
    v2[j] = m.second;
  }
  return {from_values(v1), from_values(v2)};
}

OccupationMoments occupation_moments_mc(const Ball& A, std::size_t M, std::uint64_t seed, const HittingOptions& opts) {
  check_ball(A);
  if (M == 0) throw std::invalid_argument("occupation_moments_mc: M must be >= 1");
  const std::size_t d = A.dimension();
  const double mass = duration_mass(opts.r_min, opts.r_max);
  const double r2 = A.radius * A.radius;
  std::vector<double> v1(M), v2(M);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < M; ++i) {
    Stream rng(seed, i);
    const DurationSample s = sample_duration(opts.r_min, opts.r_max, rng, M);
    const LifetimePath path = rescale(sample_normalized_excursion(opts.resolution.half_steps_for(s.duration), rng),
                                      s.duration);
    const std::size_t last = path.step_count();
    const std::vector<double> x0(d, 0.0);
    double occ = 0.0;
    walk_snake(path, x0, rng, [&](std::size_t k, std::span<const double> t) {
      if (k == last) return;
      double s2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) s2 += (t[c] - A.center[c]) * (t[c] - A.center[c]);
      if (s2 <= r2) occ += path.contour_step;
    });
    v1[i] = mass * occ;
    v2[i] = mass * occ * occ;
  }
  OccupationMoments out{from_values(v1), from_values(v2)};
  // Excluded scales, estimated from scale-integrated pilots.
  const double a = std::pow(opts.r_min, 0.25), b = std::pow(opts.r_max, 0.25);
  const double ds = 1.0 / (2.0 * static_cast<double>(opts.pilot_half_steps));
  std::vector<double> lo1(opts.pilot), hi1(opts.pilot), lo2(opts.pilot), hi2(opts.pilot);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t j = 0; j < opts.pilot; ++j) {
    Stream rng(derive_seed(seed, 0x7a11), j);
    const std::vector<double> tips = normalized_tips(opts.pilot_half_steps, d, rng);
    const auto ivs = tip_intervals(tips, 2 * opts.pilot_half_steps, d, A.center, A.radius);
    const MomentPair lo = occupation_pair(ivs, ds, 0.0, a), hi = occupation_pair(ivs, ds, b, INFINITY);
    lo1[j] = lo.first;
    hi1[j] = hi.first;
    lo2[j] = lo.second;
    hi2[j] = hi.second;
  }
  if (opts.pilot > 0) {
    auto bound = [](const std::vector<double>& v) {
      const Estimate e = mean_estimate(v);
      return e.value + 3.0 * e.stderr_;
    };
    out.first.lower_tail = bound(lo1);
    out.first.upper_tail = bound(hi1);
    out.second.lower_tail = bound(lo2);
    out.second.upper_tail = bound(hi2);
  }
  return out;
}

ContinuationEstimate continuation_occupation_mc(std::span<const double> path_points, std::size_t dimension,
                                                double contour_step, const Ball& A, std::size_t max_level,
                                                std::size_t M, std::uint64_t seed) {
  const std::size_t d = dimension;
  if (d == 0 || path_points.size() % d != 0 || path_points.size() < d)
    throw std::invalid_argument("continuation_occupation_mc: bad path");
  const std::size_t L = path_points.size() / d - 1;
  if (max_level <= L) throw std::invalid_argument("continuation_occupation_mc: max_level must exceed the path");
  const double sd = std::sqrt(std::sqrt(contour_step));
  const double r2 = A.radius * A.radius;
  std::vector<double> v(M, 0.0);
  std::vector<unsigned char> cut(M, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t j = 0; j < M; ++j) {
    Stream rng(seed, j);
    std::vector<double> stack((max_level + 1) * d);
    std::copy(path_points.begin(), path_points.end(), stack.begin());
    std::size_t level = L;
    double occ = 0.0;
    while (level > 0) {
      const double* tip = stack.data() + level * d;
      double s2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) s2 += (tip[c] - A.center[c]) * (tip[c] - A.center[c]);
      if (s2 <= r2) occ += contour_step;
      if (rng.below(2)) {
        if (level + 1 > max_level) {
          cut[j] = 1;
          break;
        }
        double* dst = stack.data() + (level + 1) * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] = tip[c] + sd * rng.normal();
        ++level;
      } else {
        --level;
      }
    }
    v[j] = occ;
  }
  ContinuationEstimate e;
  const Estimate m = mean_estimate(v);
  e.estimate = m.value;
  e.stderr_ = m.stderr_;
  e.samples = M;
  for (unsigned char c : cut) e.truncated += c;
  return e;
}

}  // namespace snake
