#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "snake/excursion.hpp"
#include "snake/rng.hpp"

using namespace snake;

TEST(Excursion, OneStepIsUniquePath) {
  Stream rng(1, 0);
  const LifetimePath p = sample_normalized_excursion(1, rng);
  ASSERT_EQ(p.levels.size(), 3u);
  EXPECT_DOUBLE_EQ(p.value(0), 0.0);
  EXPECT_DOUBLE_EQ(p.value(1), std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(p.value(2), 0.0);
  EXPECT_DOUBLE_EQ(p.duration(), 1.0);
}

TEST(Excursion, TwoStepsIsStrictlyPositive) {
  // strictly positive excursions of length 4: only (0,a,2a,a,0)
  for (std::uint64_t r = 0; r < 50; ++r) {
    Stream rng(7, r);
    const LifetimePath p = sample_normalized_excursion(2, rng);
    EXPECT_EQ(p.levels, (std::vector<std::int32_t>{0, 1, 2, 1, 0}));
    EXPECT_DOUBLE_EQ(p.height_unit, 0.5);
  }
}

TEST(Excursion, InvariantsHoldForLongPaths) {
  Stream rng(3, 0);
  const LifetimePath p = sample_normalized_excursion(5000, rng);
  EXPECT_TRUE(p.satisfies_invariants());
  EXPECT_EQ(p.step_count(), 10000u);
  EXPECT_NEAR(p.duration(), 1.0, 1e-12);
  for (std::size_t i = 1; i + 1 < p.levels.size(); ++i) ASSERT_GT(p.levels[i], 0);
}

TEST(Excursion, MeanMaximumMatchesBrownianExcursion) {
  // E[max normalized excursion] = sqrt(pi/2); the walk sits slightly below at finite n.
  const std::size_t R = 2000, n = 4000;
  double s = 0, s2 = 0;
  for (std::size_t r = 0; r < R; ++r) {
    Stream rng(11, r);
    const double m = sample_normalized_excursion(n, rng).max_value();
    s += m;
    s2 += m * m;
  }
  const double mean = s / R, se = std::sqrt((s2 / R - mean * mean) / R);
  EXPECT_NEAR(mean, std::sqrt(std::numbers::pi / 2), 4 * se + 0.02);
}

TEST(Duration, DegenerateWindow) {
  Stream rng(1, 0);
  const DurationSample s = sample_duration(1.0, 1.0, rng);
  EXPECT_DOUBLE_EQ(s.duration, 1.0);
}

TEST(Duration, MedianOnOneToFour) {
  std::vector<double> xs;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    Stream rng(5, r);
    xs.push_back(sample_duration(1.0, 4.0, rng).duration);
  }
  std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
  EXPECT_NEAR(xs[xs.size() / 2], 16.0 / 9.0, 0.03);
  for (double x : xs) {
    ASSERT_GE(x, 1.0);
    ASSERT_LE(x, 4.0);
  }
}

TEST(Duration, WindowMass) {
  // density c r^{-3/2}, c = 1/(2 sqrt(2 pi))
  EXPECT_NEAR(duration_mass(1.0, 4.0), 2 * kItoDensity * 0.5, 1e-15);
  Stream rng(1, 0);
  const DurationSample s = sample_duration(1.0, 4.0, rng, 10);
  EXPECT_NEAR(s.importance_weight, duration_mass(1.0, 4.0) / 10, 1e-15);
}

TEST(Duration, MaxTailIsOneOverTwoT) {
  // E[max] = int P(max > x) dx = sqrt(pi / 2), and N_0(sup > t) = 1 / (2t)
  double mean = 0.0;
  for (int k = 0; k < 40000; ++k) mean += excursion_max_tail((k + 0.5) * 1e-4) * 1e-4;
  EXPECT_NEAR(mean, std::sqrt(std::numbers::pi / 2), 1e-6);
  for (double t : {0.1, 0.5, 1.0, 3.0}) EXPECT_NEAR(height_mass_between(t, 1e-10, 1e10), 1.0 / (2 * t), 1e-4 / t);
}

TEST(Rescale, IdentityAndSixteen) {
  Stream rng(2, 0);
  const LifetimePath p = sample_normalized_excursion(50, rng);
  const LifetimePath same = rescale(p, 1.0);
  EXPECT_EQ(same.levels, p.levels);
  EXPECT_DOUBLE_EQ(same.contour_step, p.contour_step);
  const LifetimePath big = rescale(p, 16.0);
  EXPECT_DOUBLE_EQ(big.contour_step, 16 * p.contour_step);
  EXPECT_DOUBLE_EQ(big.height_unit, 4 * p.height_unit);
  EXPECT_DOUBLE_EQ(big.height_unit, std::sqrt(big.contour_step));
}

TEST(Rescale, OneStepToFour) {
  Stream rng(1, 0);
  const LifetimePath p = rescale(sample_normalized_excursion(1, rng), 4.0);
  EXPECT_DOUBLE_EQ(p.value(1), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(p.contour_step, 2.0);
}

TEST(ConditionHeight, AcceptedPathsExceedThreshold) {
  Resolution res{1e-3, 1, 1 << 14};
  for (std::uint64_t r = 0; r < 30; ++r) {
    Stream rng(9, r);
    const HeightConditioned h = condition_height(0.5, 1e-2, 1e3, res, rng);
    EXPECT_GT(h.path.max_value(), 0.5);
  }
}

TEST(ConditionHeight, MassIsOneOverTwoT) {
  Resolution res{1e-4, 1, 1 << 14};
  for (double t : {0.5, 1.0}) {
    const HeightMassEstimate e = estimate_height_mass(t, 1e-2, 1e4, res, 6000, 17);
    const double total = e.estimate + e.lower_tail_mass;
    EXPECT_NEAR(total, 1.0 / (2 * t), 4 * e.stderr_ + e.upper_tail_bound + 0.05 / t) << "t=" << t;
  }
}

TEST(LevelBand, OneStepPath) {
  Stream rng(1, 0);
  const LifetimePath p = sample_normalized_excursion(1, rng);
  const LevelBand b = local_time_band(p, 0.5, 0.5);
  EXPECT_EQ(b.indices, (std::vector<std::size_t>{1}));
  EXPECT_DOUBLE_EQ(b.weight, 1.0);
  EXPECT_TRUE(local_time_band(p, 2.0, 0.5).indices.empty());
}

TEST(LevelBand, OccupationIdentity) {
  Stream rng(4, 0);
  const LifetimePath p = sample_normalized_excursion(3000, rng);
  const double delta = p.height_unit;
  double total = 0.0;
  for (std::int32_t k = 0; k <= p.max_level(); ++k) {
    const LevelBand b = local_time_band(p, (k + 0.5) * delta, delta);
    total += delta * b.weight * static_cast<double>(b.indices.size());
  }
  EXPECT_NEAR(total, p.duration(), 1.5 * p.contour_step);
}
