#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>

#include "snake/geometry.hpp"
#include "snake/kernels.hpp"
#include "snake/rng.hpp"

using namespace snake;

namespace {
WeightedPointMeasure random_measure(std::size_t n, std::size_t d, std::uint64_t seed) {
  Stream rng(seed, 0);
  WeightedPointMeasure mu(d);
  std::vector<double> p(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : p) x = rng.normal();
    mu.add(p, rng.uniform());
  }
  return mu;
}

class Threads : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { omp_set_num_threads(GetParam()); }
  void TearDown() override { omp_set_num_threads(1); }
};
}  // namespace

TEST_P(Threads, GaussianPairSumBitExact) {
  const auto mu = random_measure(700, 5, 1);
  // the parallel kernel truncates at a cutoff radius, so it is bit-exact across thread counts
  // and agrees with the brute-force reference up to the exp(-cutoff^2/2) tail
  for (double eps : {0.05, 0.3, 2.0}) {
    const double par = kernels::gaussian_pair_sum(mu, eps);
    omp_set_num_threads(1);
    const double serial = kernels::gaussian_pair_sum(mu, eps);
    omp_set_num_threads(GetParam());
    EXPECT_EQ(par, serial);
    const double ref = reference::gaussian_pair_sum(mu, eps);
    const double tail = mu.total_mass() * mu.total_mass() * std::exp(-0.5 * kernels::kGaussianCutoff * kernels::kGaussianCutoff);
    EXPECT_LE(ref - par, tail + 1e-12 * ref);
    EXPECT_GE(ref - par, -1e-12 * ref);
  }
}

TEST_P(Threads, KernelPairSumBitExact) {
  const auto mu = random_measure(600, 3, 2);
  for (const Kernel& f : {Kernel::power(0.5), Kernel::power(1.5), Kernel::log_power(2.0)})
    EXPECT_EQ(kernels::kernel_pair_sum(mu, f, 0.01), reference::kernel_pair_sum(mu, f, 0.01));
}

TEST_P(Threads, KernelMatrixBitExact) {
  const PointCloud c = support_cloud(random_measure(300, 4, 3));
  EXPECT_EQ(kernels::kernel_matrix(c, Kernel::power(1.0), 0.02), reference::kernel_matrix(c, Kernel::power(1.0), 0.02));
}

TEST_P(Threads, EpsilonVolumeBitExact) {
  const PointCloud c = support_cloud(random_measure(2000, 5, 4));
  const Region A = Region::make_ball(std::vector<double>(5, 0.0), 1.5);
  const VolumeEstimate a = kernels::epsilon_volume(c, A, 0.4, 50000, 9);
  const VolumeEstimate b = reference::epsilon_volume(c, A, 0.4, 50000, 9);
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.estimate, b.estimate);
}

INSTANTIATE_TEST_SUITE_P(Kernels, Threads, ::testing::Values(1, 2, 4));

TEST(Kernels, GaussianPairSumByHand) {
  WeightedPointMeasure mu(1);
  mu.add(std::vector<double>{0.0}, 1.0);
  mu.add(std::vector<double>{1.0}, 2.0);
  const double eps = 0.5;
  const double e = std::exp(-1.0 / (2 * eps * eps));
  // diagonal 1 + 4, off-diagonal 2 * 2 e (unnormalized Gaussian)
  EXPECT_NEAR(kernels::gaussian_pair_sum(mu, eps), 5.0 + 4.0 * e, 1e-14);
}

TEST(Kernels, SampledPairSumIsUnbiased) {
  const auto mu = random_measure(3000, 5, 3);
  for (double eps : {0.2, 1.0}) {
    const double exact = kernels::gaussian_pair_sum(mu, eps);
    const Estimate e = kernels::gaussian_pair_sum_sampled(mu, eps, 600, 11);
    EXPECT_GT(e.stderr_, 0.0);
    EXPECT_NEAR(e.value, exact, 4.0 * e.stderr_);
    const Estimate again = kernels::gaussian_pair_sum_sampled(mu, eps, 600, 11);
    EXPECT_EQ(e.value, again.value);
  }
  EXPECT_EQ(kernels::gaussian_pair_sum_sampled(WeightedPointMeasure(2), 0.5, 10, 1).value, 0.0);
}
