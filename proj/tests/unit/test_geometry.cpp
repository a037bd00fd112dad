#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "snake/geometry.hpp"
#include "snake/moments.hpp"
#include "snake/rng.hpp"

using namespace snake;

namespace {
std::vector<double> axis(int d, double r) {
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  x[0] = r;
  return x;
}

// |B(0,R) ∩ B(c,R)| in R^d for |c| = s < 2R: twice a spherical cap of height R - s/2.
double lens_volume(int d, double R, double s) {
  const double a = s / (2 * R);
  // cap volume = kappa_{d-1} R^d int_a^1 (1 - t^2)^{(d-1)/2} dt
  const std::size_t m = 200000;
  double integral = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = a + (1 - a) * (static_cast<double>(k) + 0.5) / m;
    integral += std::pow(1 - t * t, (d - 1) / 2.0) * (1 - a) / m;
  }
  return 2 * unit_ball_volume(d - 1) * std::pow(R, d) * integral;
}
}  // namespace

TEST(Region, BallAndBox) {
  const Region b = Region::make_ball(axis(3, 0.0), 2.0);
  EXPECT_NEAR(b.volume(), 4.0 / 3 * std::numbers::pi * 8, 1e-12);
  const Region x = Region::make_box({0, 0}, {2, 3});
  EXPECT_DOUBLE_EQ(x.volume(), 6.0);
  const std::vector<double> in{1.0, 2.9}, out{1.0, 3.1};
  EXPECT_TRUE(x.contains(in));
  EXPECT_FALSE(x.contains(out));
  Stream rng(1, 0);
  std::vector<double> p(3);
  for (int i = 0; i < 1000; ++i) {
    b.sample(rng, p);
    ASSERT_TRUE(b.contains(p));
  }
}

TEST(EpsilonVolume, SinglePoint) {
  const int d = 5;
  const double eps = 0.3;
  PointCloud c(d, axis(d, 0.0));
  const Region A = Region::make_ball(axis(d, 0.0), 2 * eps);
  const VolumeEstimate v = epsilon_volume(c, A, eps, 200000, 3);
  EXPECT_NEAR(v.estimate, std::pow(2.0, -d) * A.volume(), 4 * v.stderr_);
}

TEST(EpsilonVolume, FullCover) {
  PointCloud c(3, std::vector<double>{5.0, 0.0, 0.0});
  const Region A = Region::make_box({0, 0, 0}, {1, 1, 1});
  const VolumeEstimate v = epsilon_volume(c, A, 10.0, 5000, 4);
  EXPECT_DOUBLE_EQ(v.estimate, 1.0);
}

TEST(EpsilonVolume, TwoPointsInclusionExclusion) {
  const int d = 4;
  const double eps = 0.5, s = 0.6;
  std::vector<double> coords = axis(d, 0.0);
  const auto q = axis(d, s);
  coords.insert(coords.end(), q.begin(), q.end());
  PointCloud c(d, coords);
  const Region A = Region::make_box({-1, -1, -1, -1}, {2, 1, 1, 1});
  const double exact = 2 * unit_ball_volume(d) * std::pow(eps, d) - lens_volume(d, eps, s);
  const VolumeEstimate v = epsilon_volume(c, A, eps, 400000, 5);
  EXPECT_NEAR(v.estimate, exact, 4 * v.stderr_);
}

TEST(EpsilonVolume, DisjointRegion) {
  PointCloud c(3, std::vector<double>{0.0, 0.0, 0.0});
  const Region A = Region::make_ball({10, 0, 0}, 1.0);
  EXPECT_EQ(epsilon_volume(c, A, 0.5, 10000, 6).estimate, 0.0);
}

TEST(NnSpacing, Grid) {
  const PointCloud g = cube_grid_cloud(2, 3, 50);
  EXPECT_NEAR(median_nn_spacing(g, 500, 1), 1.0 / 50, 1e-12);
}

TEST(VolumeCurve, GuardAndDisjoint) {
  const PointCloud g = cube_grid_cloud(2, 5, 20);
  WeightedPointMeasure occ = cube_lebesgue_grid(2, 5, 20);
  const Region far = Region::make_ball(axis(5, 10.0), 1.0);
  const VolumeCurve c =
      volume_scaling_experiment(g, occ, far, {0.5, 0.3, 0.2, 0.1}, ScalingLaw{5}, 1.0, 20000, 7);
  EXPECT_NEAR(c.guard_eps, 5.0 / 20, 1e-12);
  for (const auto& r : c.rows) EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(c.rows[0].guarded);
  EXPECT_FALSE(c.rows[3].guarded);
  EXPECT_THROW(volume_scaling_experiment(g, occ, far, {0.1, 0.3}, ScalingLaw{5}, 1.0, 100, 7), std::invalid_argument);
}

TEST(VolumeCurve, SupportSlopeOfSquare) {
  // a dense 2-d sheet in R^5: |K^eps ∩ A| ~ eps^3 once eps is far below the sheet size
  const PointCloud g = cube_grid_cloud(2, 5, 400);
  const Region A = Region::make_box({0.2, 0.2, -0.1, -0.1, -0.1}, {0.8, 0.8, 0.1, 0.1, 0.1});
  const VolumeCurve c = support_scaling_experiment(g, A, {0.08, 0.06, 0.04, 0.03}, 400000, 8);
  EXPECT_NEAR(c.fitted_slope, 3.0, 0.1);
}

TEST(ScalingLaw, Phi) {
  EXPECT_DOUBLE_EQ(ScalingLaw{4}.phi(0.1), std::log(10.0));
  EXPECT_DOUBLE_EQ(ScalingLaw{5}.phi(0.5), 2.0);
}

TEST(SEnergy, SingleAtom) {
  WeightedPointMeasure mu(3);
  mu.add(axis(3, 1.0), 2.0);
  const double eps = 0.2;
  EXPECT_NEAR(s_energy(mu, eps), 4.0 * std::pow(2 * std::numbers::pi * eps * eps, -1.5), 1e-9);
  EXPECT_EQ(s_energy(WeightedPointMeasure(3), eps), 0.0);
}

TEST(SEnergy, DecreasingInEps) {
  Stream rng(9, 0);
  WeightedPointMeasure mu(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> p{rng.normal(), rng.normal(), rng.normal()};
    mu.add(p, rng.uniform());
  }
  double prev = INFINITY;
  for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double s = s_energy(mu, eps);
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(SEnergy, LebesgueSquare) {
  const WeightedPointMeasure leb = cube_lebesgue_grid(2, 4, 200);
  EXPECT_NEAR(leb.total_mass(), 1.0, 1e-12);
  const double eps = 0.05;
  const double v = std::pow(eps, 2) * s_energy(leb, eps);
  // each side of the square loses eps / sqrt(2 pi) of Gaussian mass at each end
  const double edge = 1.0 - 2 * eps / std::sqrt(2 * std::numbers::pi);
  EXPECT_NEAR(v * 2 * std::numbers::pi, edge * edge, 0.005);
}

TEST(Energy, ConstantsAndEmpty) {
  EXPECT_NEAR(energy_constant(5, EnergyMode::slice), 4.0 / 3, 1e-15);
  EXPECT_NEAR(energy_constant(5, EnergyMode::occupation), 16.0 / 3, 1e-15);
  EXPECT_NEAR(energy_constant(6, EnergyMode::occupation), 16.0 / 8, 1e-15);
  for (const auto& r : energy_scaling_check(WeightedPointMeasure(5), {0.3, 0.2}, 5, EnergyMode::slice))
    EXPECT_EQ(r.value, 0.0);
}

TEST(Kernel, ValuesAndNames) {
  EXPECT_DOUBLE_EQ(Kernel::power(1.5)(4.0), 0.125);
  EXPECT_NEAR(Kernel::log_power(2.0)(1.0), std::pow(std::log(2.0), 2), 1e-15);
  EXPECT_EQ(Kernel::power(0.5).name().empty(), false);
}

TEST(Capacity, ClosedForms) {
  const Kernel f = Kernel::power(1.0);
  const double r_cell = 0.05, rho = 0.4;
  PointCloud one(3, axis(3, 0.0));
  const CapacityResult c1 = capacity(one, f, 1e-9, 1000, r_cell);
  EXPECT_NEAR(c1.capacity, 1.0 / f(r_cell), 1e-9 / f(r_cell));
  std::vector<double> coords = axis(3, 0.0);
  const auto q = axis(3, rho);
  coords.insert(coords.end(), q.begin(), q.end());
  const CapacityResult c2 = capacity(PointCloud(3, coords), f, 1e-9, 1000, r_cell);
  EXPECT_NEAR(c2.capacity, 2.0 / (f(r_cell) + f(rho)), 1e-8 * c2.capacity);
  EXPECT_NEAR(c2.weights[0], 0.5, 1e-6);
}

TEST(Capacity, MonotoneUnderInclusion) {
  const Kernel f = Kernel::power(1.0);
  Stream rng(10, 0);
  PointCloud c(3);
  double prev = 0.0;
  for (int step = 0; step < 4; ++step) {
    for (int i = 0; i < 30; ++i) {
      std::vector<double> p{rng.uniform(), rng.uniform(), rng.uniform()};
      c.push(p);
    }
    const CapacityResult r = capacity(c, f, 1e-7, 100000, 0.02);
    EXPECT_TRUE(r.converged);
    EXPECT_TRUE(r.monotone);
    EXPECT_GE(r.capacity, prev * (1 - 1e-6));
    prev = r.capacity;
  }
}

TEST(Capacity, EquivalenceReport) {
  const PointCloud g = cube_grid_cloud(2, 3, 15);
  const std::vector<Kernel> ks{Kernel::power(0.5), Kernel::power(1.0), Kernel::power(1.5)};
  const EquivalenceReport same = capacity_equivalence_report(g, g, ks);
  for (const auto& r : same.rows) EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  EXPECT_DOUBLE_EQ(same.spread, 1.0);
  // doubling distances divides the Riesz energy by 2^beta
  PointCloud big = g;
  big.scale(2.0);
  const EquivalenceReport scaled = capacity_equivalence_report(big, g, ks);
  for (std::size_t k = 0; k < ks.size(); ++k)
    EXPECT_NEAR(scaled.rows[k].ratio, std::pow(2.0, ks[k].beta), 0.1 * std::pow(2.0, ks[k].beta));
}

TEST(CubeReference, Limits) {
  const CubeReference c = cube_reference(2, 4, Kernel::power(1.0));
  EXPECT_NEAR(c.volume_limit, 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(c.tube_volume_limit, std::numbers::pi, 1e-12);
  EXPECT_NEAR(c.s_energy_limit, 1 / (2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(c.kernel_integral, 1.0, 1e-9);
  EXPECT_FALSE(cube_reference(2, 4, Kernel::power(2.5)).kernel_integral_finite);
}

TEST(CubeReference, SteinerMatchesMonteCarlo) {
  const double eps = 0.1;
  const VolumeEstimate v = cube_tube_volume_mc(2, 4, eps, 400000, 11);
  EXPECT_NEAR(v.estimate, cube_tube_volume_exact(2, 4, eps), 4 * v.stderr_);
  // eps -> 0: eps^{p-d} |tube| -> volume of the unit 2-ball
  EXPECT_NEAR(std::pow(1e-4, -2) * cube_tube_volume_exact(2, 4, 1e-4), std::numbers::pi, 1e-3);
}
