#include "snake/kernels.hpp"

#include <cmath>

#include "snake/rng.hpp"

namespace snake {

namespace {
double dist2(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}
}  // namespace

namespace kernels {

double gaussian_pair_sum(const WeightedPointMeasure& mu, double eps) {
  const std::size_t n = mu.size(), d = mu.dimension();
  if (n == 0) return 0.0;
  const double inv = 1.0 / (2.0 * eps * eps);
  const double cut = kGaussianCutoff * eps;
  const SpatialIndex index(d, mu.coords(), cut);
  std::vector<double> row(n);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    index.for_each_within(mu.point(i), cut, [&](std::size_t j, double r2) { s += mu.weight(j) * std::exp(-r2 * inv); });
    row[i] = mu.weight(i) * s;
  }
  return ordered_sum(row);
}

Estimate gaussian_pair_sum_sampled(const WeightedPointMeasure& mu, double eps, std::size_t rows, std::uint64_t seed) {
  const std::size_t n = mu.size(), d = mu.dimension();
  if (n == 0 || rows == 0) return {};
  const double inv = 1.0 / (2.0 * eps * eps);
  const double cut = kGaussianCutoff * eps;
  const SpatialIndex index(d, mu.coords(), cut);
  std::vector<std::size_t> pick(rows);
  Stream rng(seed, 0);
  for (auto& i : pick) i = rng.below(n);
  std::vector<double> row(rows);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t k = 0; k < rows; ++k) {
    const std::size_t i = pick[k];
    double s = 0.0;
    index.for_each_within(mu.point(i), cut, [&](std::size_t j, double r2) { s += mu.weight(j) * std::exp(-r2 * inv); });
    row[k] = static_cast<double>(n) * mu.weight(i) * s;
  }
  return mean_estimate(row);
}

double kernel_pair_sum(const WeightedPointMeasure& mu, const Kernel& f, double r_cell) {
  const std::size_t n = mu.size(), d = mu.dimension();
  const double* x = mu.coords().data();
  const double diag = f(r_cell);
  std::vector<double> row(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) {
    double s = mu.weight(i) * diag;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += mu.weight(j) * f(std::sqrt(dist2(x + i * d, x + j * d, d)));
    row[i] = mu.weight(i) * s;
  }
  return ordered_sum(row);
}

std::vector<double> kernel_matrix(const PointCloud& pts, const Kernel& f, double r_cell) {
  const std::size_t n = pts.size(), d = pts.dimension();
  const double* x = pts.coords().data();
  std::vector<double> F(n * n);
  const double diag = f(r_cell);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      F[i * n + j] = i == j ? diag : f(std::sqrt(dist2(x + i * d, x + j * d, d)));
  return F;
}

VolumeEstimate epsilon_volume(const PointCloud& cloud, const Region& A, double eps, std::size_t M, std::uint64_t seed) {
  if (cloud.empty()) return VolumeEstimate{0.0, 0.0, 0, M};
  const SpatialIndex index(cloud, eps);
  return hit_or_miss(A, M, seed, [&](std::span<const double> x) { return index.any_within(x, eps); });
}

}  // namespace kernels

namespace reference {

double gaussian_pair_sum(const WeightedPointMeasure& mu, double eps) {
  const std::size_t n = mu.size(), d = mu.dimension();
  const double* x = mu.coords().data();
  const double inv = 1.0 / (2.0 * eps * eps);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += mu.weight(j) * std::exp(-dist2(x + i * d, x + j * d, d) * inv);
    total += mu.weight(i) * s;
  }
  return total;
}

double kernel_pair_sum(const WeightedPointMeasure& mu, const Kernel& f, double r_cell) {
  const std::size_t n = mu.size(), d = mu.dimension();
  const double* x = mu.coords().data();
  const double diag = f(r_cell);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = mu.weight(i) * diag;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += mu.weight(j) * f(std::sqrt(dist2(x + i * d, x + j * d, d)));
    total += mu.weight(i) * s;
  }
  return total;
}

std::vector<double> kernel_matrix(const PointCloud& pts, const Kernel& f, double r_cell) {
  const std::size_t n = pts.size(), d = pts.dimension();
  const double* x = pts.coords().data();
  std::vector<double> F(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      F[i * n + j] = i == j ? f(r_cell) : f(std::sqrt(dist2(x + i * d, x + j * d, d)));
  return F;
}

VolumeEstimate epsilon_volume(const PointCloud& cloud, const Region& A, double eps, std::size_t M, std::uint64_t seed) {
  const std::size_t d = A.dimension();
  const double e2 = eps * eps;
  VolumeEstimate e;
  e.samples = M;
  std::vector<double> x(d);
  for (std::size_t c = 0; c * kVolumeChunk < M; ++c) {
    Stream rng(seed, c);
    const std::size_t n = std::min(kVolumeChunk, M - c * kVolumeChunk);
    for (std::size_t j = 0; j < n; ++j) {
      A.sample(rng, x);
      for (std::size_t k = 0; k < cloud.size(); ++k)
        if (dist2(x.data(), cloud.point(k).data(), d) <= e2) {
          ++e.hits;
          break;
        }
    }
  }
  const double p = M ? static_cast<double>(e.hits) / static_cast<double>(M) : 0.0;
  e.estimate = A.volume() * p;
  e.stderr_ = M ? A.volume() * std::sqrt(p * (1.0 - p) / static_cast<double>(M)) : 0.0;
  return e;
}

}  // namespace reference

}  // namespace snake
