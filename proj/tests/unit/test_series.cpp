#include <gtest/gtest.h>

#include <cmath>

#include "snake/series.hpp"

using namespace snake;

TEST(Series, QFirstTermsD5) {
  const SeriesCoefficients q = q_seq(5, 10);
  EXPECT_EQ(q.at(0), 1);
  EXPECT_EQ(q.at(1), mpq_class(9, 4));
  EXPECT_EQ(q.at(2), mpq_class(81, 20));
  EXPECT_TRUE(q.verify_recurrence());
}

TEST(Series, RhoFirstTerms) {
  const SeriesCoefficients r = rho_seq(10);
  EXPECT_EQ(r.at(2), 1);
  EXPECT_EQ(r.at(3), 2);
  EXPECT_EQ(r.at(4), 10);
  EXPECT_TRUE(r.verify_recurrence());
}

TEST(Series, GammaFirstTerms) {
  const SeriesCoefficients g = gamma_seq(10);
  EXPECT_EQ(g.at(1), mpq_class(1, 2));
  EXPECT_EQ(g.at(2), mpq_class(1, 8));
  EXPECT_EQ(g.at(3), mpq_class(1, 16));
  EXPECT_TRUE(g.verify_recurrence());
}

TEST(Series, GammaMatchesTaylorCoefficients) {
  // 1 - sqrt(1 - x) = sum_n C(2n, n) x^n / ((2n - 1) 4^n)
  const SeriesCoefficients g = gamma_seq(40);
  mpz_class binom = 1;
  for (unsigned n = 1; n <= 40; ++n) {
    binom = binom * (2 * n) * (2 * n - 1) / (n * n);
    mpz_class four;
    mpz_ui_pow_ui(four.get_mpz_t(), 4, n);
    mpq_class want(binom, four * (2 * n - 1));
    want.canonicalize();
    EXPECT_EQ(g.at(n), want) << n;
  }
}

TEST(Series, AllPositive) {
  const SeriesCoefficients q = q_seq(6, 200), r = rho_seq(60), g = gamma_seq(60);
  for (const auto& v : q.exact) EXPECT_GT(v, 0);
  for (const auto& v : r.exact) EXPECT_GT(v, 0);
  for (const auto& v : g.exact) EXPECT_GT(v, 0);
}

TEST(Series, GammaGeneratingHalf) {
  const SeriesCoefficients g = gamma_seq(60);
  EXPECT_LE(std::abs(gamma_generating(g, 0.5) - (1 - std::sqrt(0.5))), 1e-10);
  EXPECT_LE(std::abs(gamma_generating(g, 0.1) - (1 - std::sqrt(0.9))), 1e-14);
}

TEST(Series, RatioAndRootTestsAgree) {
  for (int d : {5, 6, 7}) {
    const SeriesRadius r = a0_from_series(q_seq(d, 2000));
    EXPECT_NEAR(r.root_test / r.radius, 1.0, 0.05) << d;
    EXPECT_GT(r.a0, 0.0);
    EXPECT_LT(r.a0_error, 0.01 * r.a0);
  }
}

TEST(Series, D6ClosedForm) {
  // d = 6: u_1 = 6 / (r^2 - 1)^2, so a_0 = 6
  const SeriesRadius r = a0_from_series(q_seq(6, 2000));
  EXPECT_NEAR(r.a0, 6.0, 0.02 * 6.0);
  const SeriesCoefficients q = q_seq(6, 400);
  for (double x : {2.0, 3.0, 10.0}) EXPECT_NEAR(series_u1(q, 6.0, x), 6.0 / std::pow(x * x - 1, 2), 1e-6 / std::pow(x, 4));
}
