#include <gtest/gtest.h>

#include <cmath>

#include "snake/excursion.hpp"
#include "snake/rng.hpp"
#include "snake/snake.hpp"

using namespace snake;

namespace {
SnakeRealization make_snake(std::size_t n, std::uint64_t seed, int d = 5) {
  Stream rng(seed, 0);
  const LifetimePath life = sample_normalized_excursion(n, rng);
  const std::vector<double> x0(static_cast<std::size_t>(d), 0.0);
  return run_snake(life, x0, rng);
}

double diameter_sq(const PointCloud& c) {
  double best = 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < c.dimension(); ++k) s += std::pow(c.point(i)[k] - c.point(j)[k], 2);
      best = std::max(best, s);
    }
  return best;
}
}  // namespace

TEST(Snake, OneStepReturnsToRoot) {
  Stream rng(1, 0);
  const LifetimePath life = sample_normalized_excursion(1, rng);
  const std::vector<double> x0{1.0, -2.0, 0.5};
  const SnakeRealization s = run_snake(life, x0, rng);
  ASSERT_EQ(s.tip_count(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(s.tip(0)[k], x0[k]);
    EXPECT_EQ(s.tip(2)[k], x0[k]);
  }
  EXPECT_NE(s.tip(1)[0], x0[0]);
}

TEST(Snake, ReplayIsExact) {
  const SnakeRealization s = make_snake(2000, 3);
  EXPECT_EQ(replay_tips(s), s.tips);
}

TEST(Snake, DownStepsPopTheStack) {
  const SnakeRealization s = make_snake(500, 4, 2);
  const auto& lv = s.lifetime.levels;
  std::vector<std::vector<double>> seen(static_cast<std::size_t>(s.lifetime.max_level()) + 1);
  seen[0] = {s.tip(0)[0], s.tip(0)[1]};
  for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
    const auto L = static_cast<std::size_t>(lv[i + 1]);
    if (lv[i + 1] > lv[i]) {
      seen[L] = {s.tip(i + 1)[0], s.tip(i + 1)[1]};
    } else {
      EXPECT_EQ(s.tip(i + 1)[0], seen[L][0]);
      EXPECT_EQ(s.tip(i + 1)[1], seen[L][1]);
    }
  }
}

TEST(Snake, PushVarianceIsSqrtContourStep) {
  // n = 2: tip_1 - x0 ~ N(0, sqrt(1/4)) per coordinate
  const std::size_t R = 10000;
  double s2 = 0, s4 = 0;
  for (std::size_t r = 0; r < R; ++r) {
    Stream rng(21, r);
    const LifetimePath life = sample_normalized_excursion(2, rng);
    const std::vector<double> x0(1, 0.0);
    const double g = run_snake(life, x0, rng).tip(1)[0];
    s2 += g * g;
    s4 += g * g * g * g;
  }
  const double var = s2 / R, se = std::sqrt((s4 / R - var * var) / R);
  EXPECT_NEAR(var, 0.5, 3 * se);
}

TEST(RangeCloud, SizesAndDedup) {
  Stream rng(1, 0);
  const LifetimePath life = sample_normalized_excursion(1, rng);
  const std::vector<double> x0(5, 0.0);
  const SnakeRealization s = run_snake(life, x0, rng);
  EXPECT_EQ(range_cloud(s).size(), 3u);
  EXPECT_EQ(range_cloud(s, true).size(), 2u);
  const SnakeRealization big = make_snake(300, 2);
  EXPECT_LE(range_cloud(big).size(), 601u);
  EXPECT_EQ(range_cloud(big, true).size(), 301u);  // one point per up-step plus the root
}

TEST(Occupation, TotalMassAndEmptyWindow) {
  const SnakeRealization s = make_snake(1000, 5);
  const WeightedPointMeasure mu = occupation(s, 0.0, INFINITY);
  EXPECT_NEAR(mu.total_mass(), 1.0, 1e-12);
  for (double w : mu.weights()) EXPECT_GE(w, 0.0);
  EXPECT_TRUE(occupation(s, s.lifetime.max_value() + 1.0, INFINITY).empty());
}

TEST(YSlice, EmptyAboveMaxAndOccupationIdentity) {
  const SnakeRealization s = make_snake(2000, 6);
  EXPECT_TRUE(y_slice(s, s.lifetime.max_value() + 0.1, 0.05).empty());
  const double delta = s.lifetime.height_unit;
  double total = 0;
  for (std::int32_t k = 0; k <= s.lifetime.max_level(); ++k) total += delta * y_slice(s, (k + 0.5) * delta, delta).total_mass();
  EXPECT_NEAR(total, s.duration(), 1.5 * s.lifetime.contour_step);
}

TEST(IseTransform, ScalesBySqrtTwo) {
  const SnakeRealization s = make_snake(400, 7);
  const SnakeRealization t = ise_transform(s);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(t.tip(0)[k], 0.0);
  for (std::size_t i = 0; i < s.tip_count(); ++i)
    for (std::size_t k = 0; k < 5; ++k) ASSERT_DOUBLE_EQ(t.tip(i)[k], std::sqrt(2.0) * s.tip(i)[k]);
  EXPECT_NEAR(occupation(t, 0.0, INFINITY).total_mass(), 1.0, 1e-12);
}

TEST(ScalingTransform, IdentityAndDiameter) {
  const SnakeRealization s = make_snake(200, 8, 3);
  const SnakeRealization same = scaling_transform(s, 1.0);
  EXPECT_EQ(same.tips, s.tips);
  const double lambda = 2.0;
  const SnakeRealization t = scaling_transform(s, lambda);
  EXPECT_NEAR(t.duration(), s.duration() / std::pow(lambda, 4), 1e-12);
  EXPECT_NEAR(std::sqrt(diameter_sq(range_cloud(t))), std::sqrt(diameter_sq(range_cloud(s))) / lambda, 1e-12);
}

TEST(ScalingTransform, MatchesRescaleThenRun) {
  // tip variance at the contour midpoint: duration-1 snake scaled by lambda^{-1} vs a snake on the
  // rescaled lifetime of duration lambda^{-4}
  const double lambda = std::pow(16.0, -0.25);  // target duration 16
  const std::size_t R = 4000, n = 64;
  double a = 0, a2 = 0, b = 0, b2 = 0;
  for (std::size_t r = 0; r < R; ++r) {
    Stream rng(31, r);
    const LifetimePath life = sample_normalized_excursion(n, rng);
    const std::vector<double> x0(1, 0.0);
    const double x = scaling_transform(run_snake(life, x0, rng), lambda).tip(n)[0];
    Stream rng2(32, r);
    const LifetimePath life2 = rescale(sample_normalized_excursion(n, rng2), 16.0);
    const double y = run_snake(life2, x0, rng2).tip(n)[0];
    a += x * x, a2 += x * x * x * x, b += y * y, b2 += y * y * y * y;
  }
  const double va = a / R, vb = b / R;
  const double se = std::sqrt((a2 / R - va * va) / R + (b2 / R - vb * vb) / R);
  EXPECT_NEAR(va, vb, 3 * se);
}

TEST(Sbm, ExpectedExcursionCount) {
  // N_0(sup > t) = 1/(2t): E[K] = mass / (2 t_floor)
  for (auto [mass, t] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0}}) {
    WeightedPointMeasure nu(2);
    const std::vector<double> x0(2, 0.0);
    nu.add(x0, mass);
    SbmOptions o;
    o.resolution = Resolution{1e-2, 1, 1 << 10};
    const std::size_t R = 3000;
    double total = 0;
    for (std::size_t r = 0; r < R; ++r) {
      Stream rng(41, r);
      total += static_cast<double>(sample_sbm(nu, t, o, rng).size());
    }
    EXPECT_NEAR(total / R, 1.0, 0.08);
  }
}

TEST(Sbm, RangeCloudProperties) {
  EXPECT_TRUE(sbm_range_cloud({}, 0.5).empty());
  WeightedPointMeasure nu(2);
  const std::vector<double> x0(2, 0.0);
  nu.add(x0, 4.0);
  SbmOptions o;
  o.resolution = Resolution{1e-3, 1, 1 << 12};
  Stream rng(5, 1);
  const auto snakes = sample_sbm(nu, 0.3, o, rng);
  EXPECT_GE(sbm_range_cloud(snakes, 0.3).size(), sbm_range_cloud(snakes, 0.6).size());
}

TEST(Sbm, WalkMatchesMaterializedEnsemble) {
  WeightedPointMeasure nu(3);
  const std::vector<double> x0(3, 0.0);
  nu.add(x0, 3.0);
  SbmOptions o;
  o.resolution = Resolution{1e-3, 1, 1 << 12};
  Stream a(12, 0), b(12, 0);
  const auto snakes = sample_sbm(nu, 0.4, o, a);
  PointCloud streamed = sbm_band_cloud(nu, 0.4, 0.5, 0.05, o, b);
  PointCloud direct(3);
  for (const auto& s : snakes)
    for (std::size_t i = 0; i < s.tip_count(); ++i) {
      const double z = s.lifetime.value(i);
      if (z >= 0.5 && z < 0.55) direct.push(s.tip(i));
    }
  EXPECT_EQ(streamed.coords(), direct.coords());
}

TEST(PointMeasure, MergeAtomsKeepsMass) {
  const SnakeRealization s = make_snake(500, 9);
  const WeightedPointMeasure mu = occupation(s, 0.0, INFINITY);
  const WeightedPointMeasure m = merge_atoms(mu);
  EXPECT_LT(m.size(), mu.size());
  EXPECT_NEAR(m.total_mass(), mu.total_mass(), 1e-12);
}
