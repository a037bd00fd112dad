#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snake/excursion.hpp"
#include "snake/moments.hpp"
#include "snake/snake.hpp"

// N_0 functionals by Monte Carlo over snake excursions.
//
// Two estimators are provided. The duration-sampled one draws sigma from the truncated
// r^{-3/2} law and runs a snake at a fixed contour resolution. The scale-integrated one
// draws a duration-1 snake and integrates the spatial scale lambda = sigma^{1/4} out
// analytically: under N_0, sigma has density c r^{-3/2}, i.e. 4 c lambda^{-3} d lambda,
// so every tip contributes a closed-form integral over the lambda-interval where it
// lies in the target ball. No truncation is needed there.

namespace snake {

struct HittingOptions {
  double r_min = 1e-2;
  double r_max = 1e4;
  Resolution resolution{1e-4, 1, 1u << 18};
  std::size_t pilot = 2000;         // normalized snakes used for the tail estimates
  std::size_t pilot_half_steps = 1024;
};

struct MassEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  double upper_tail = 0.0;  // excluded mass above r_max (bound or pilot estimate)
  double lower_tail = 0.0;  // excluded mass below r_min (pilot estimate)
  double tail_budget() const { return upper_tail + lower_tail; }
};

// N_0[T_{(y,eps)} < infinity] by duration sampling. Upper tail bounded by N_0[sigma > r_max];
// lower tail estimated from a pilot of normalized snakes via their maximal reach.
MassEstimate hitting_prob_mc(std::span<const double> y, double eps, std::size_t M, std::uint64_t seed,
                             const HittingOptions& opts = {});

// Same mass, scale-integrated over duration-1 snakes with n half steps each.
MassEstimate hitting_prob_scaled(std::span<const double> y, double eps, std::size_t n, std::size_t M,
                                 std::uint64_t seed);

// Lambda-interval where lambda * t lies in the closed ball B(center, radius); empty when
// lo >= hi. Requires |center| > radius.
struct ScaleInterval {
  double lo = 0.0;
  double hi = 0.0;
};
ScaleInterval scale_interval(std::span<const double> t, std::span<const double> center, double radius);

struct OccupationMoments {
  MassEstimate first;   // N_0[int 1_A(W_s) ds]
  MassEstimate second;  // N_0[(int 1_A(W_s) ds)^2]
};

// Duration-sampled moments. The tails are pilot estimates from the scale-integrated form.
OccupationMoments occupation_moments_mc(const Ball& A, std::size_t M, std::uint64_t seed,
                                        const HittingOptions& opts = {});
// Scale-integrated moments over duration-1 snakes.
OccupationMoments occupation_moments_scaled(const Ball& A, std::size_t n, std::size_t M, std::uint64_t seed);

// E*_w[int_0^sigma 1_A(W_s) ds]: the snake restarted from the lattice path w (levels
// 0..L, lifetime L * height_unit), run until the lifetime returns to 0. Runs that
// climb above max_level lattice levels are cut there (reported).
struct ContinuationEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t truncated = 0;
  std::size_t samples = 0;
};
ContinuationEstimate continuation_occupation_mc(std::span<const double> path_points, std::size_t dimension,
                                                double contour_step, const Ball& A, std::size_t max_level,
                                                std::size_t M, std::uint64_t seed);

}  // namespace snake
