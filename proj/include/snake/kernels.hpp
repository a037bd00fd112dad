#pragma once

#include <cstdint>

#include "snake/geometry.hpp"
#include "snake/stats.hpp"

// Hot loops come in two flavours: OpenMP-parallel kernels used by the library,
// and plain serial reference implementations kept for testing and benchmarks.
// Parallel reductions are accumulated per row / per chunk and summed in index
// order, so results do not depend on the thread count.

namespace snake::kernels {

// sum_ij w_i w_j exp(-|x_i - x_j|^2 / (2 eps^2)), pairs beyond cutoff * eps dropped.
inline constexpr double kGaussianCutoff = 7.0;
double gaussian_pair_sum(const WeightedPointMeasure& mu, double eps);
// Unbiased estimate of the same sum from `rows` rows drawn uniformly with replacement.
Estimate gaussian_pair_sum_sampled(const WeightedPointMeasure& mu, double eps, std::size_t rows, std::uint64_t seed);

// sum_{i != j} w_i w_j f(|x_i - x_j|) + sum_i w_i^2 f(r_cell)
double kernel_pair_sum(const WeightedPointMeasure& mu, const Kernel& f, double r_cell);

// Dense row-major N x N kernel matrix with f(r_cell) on the diagonal.
std::vector<double> kernel_matrix(const PointCloud& pts, const Kernel& f, double r_cell);

// Hit-or-miss coverage using a spatial index.
VolumeEstimate epsilon_volume(const PointCloud& cloud, const Region& A, double eps, std::size_t M, std::uint64_t seed);

}  // namespace snake::kernels

namespace snake::reference {

double gaussian_pair_sum(const WeightedPointMeasure& mu, double eps);
double kernel_pair_sum(const WeightedPointMeasure& mu, const Kernel& f, double r_cell);
std::vector<double> kernel_matrix(const PointCloud& pts, const Kernel& f, double r_cell);
// Brute-force distance checks against every point, same sample stream as the kernel.
VolumeEstimate epsilon_volume(const PointCloud& cloud, const Region& A, double eps, std::size_t M, std::uint64_t seed);

}  // namespace snake::reference
