#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "snake/rng.hpp"

namespace snake {

// Density of the excursion duration under N_0 is kItoDensity * r^{-3/2},
// normalized so that N_0[sup zeta > t] = 1/(2t).
inline constexpr double kItoDensity = 0.19947114020071635;  // 1 / (2 sqrt(2 pi))

// N_0-mass of {r_min <= sigma <= r_max}.
double duration_mass(double r_min, double r_max);
// N_0-mass of {sigma > r}.
double duration_tail_mass(double r);
// P(max of the normalized excursion > x).
double excursion_max_tail(double x);
// N_0[sup zeta > t, sigma in [lo, hi]] by quadrature over the excursion-max law.
double height_mass_between(double t, double lo, double hi);

/// Discretized lifetime excursion.
///
/// Heights are stored as integer lattice levels; zeta_i = levels[i] * height_unit
/// and height_unit = sqrt(contour_step), so |zeta_{i+1} - zeta_i| = sqrt(ds) holds
/// by construction.
struct LifetimePath {
  std::vector<std::int32_t> levels;
  double contour_step = 0.0;
  double height_unit = 0.0;

  std::size_t step_count() const { return levels.empty() ? 0 : levels.size() - 1; }
  std::size_t half_steps() const { return step_count() / 2; }
  double duration() const { return contour_step * static_cast<double>(step_count()); }
  double value(std::size_t i) const { return levels[i] * height_unit; }
  bool up_step(std::size_t i) const { return levels[i + 1] > levels[i]; }
  std::int32_t max_level() const;
  double max_value() const { return max_level() * height_unit; }
  std::vector<double> values() const;
  bool satisfies_invariants() const;
};

struct DurationSample {
  double duration = 0.0;
  double importance_weight = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
};

// Picks the contour resolution for an excursion of duration r.
struct Resolution {
  double contour_step = 1e-3;
  std::size_t n_min = 1;
  std::size_t n_max = 1u << 22;
  std::size_t half_steps_for(double r) const;
};

LifetimePath sample_normalized_excursion(std::size_t n, Stream& rng);

// Relative rescaling: duration and contour step times factor, heights times sqrt(factor).
LifetimePath scale_duration(const LifetimePath& path, double factor);
// Requires a duration-1 path; returns a path of duration r.
LifetimePath rescale(const LifetimePath& path, double r);

// Inverse-CDF draw from the truncated r^{-3/2} law. The weight is the window mass
// divided by the number of draws the caller makes.
DurationSample sample_duration(double r_min, double r_max, Stream& rng, std::size_t draws = 1);

struct HeightConditioned {
  LifetimePath path;
  double weight = 0.0;  // window mass / tries
  std::size_t tries = 0;
};

// Rejection-samples duration-weighted excursions until sup zeta > t_min.
// Throws std::runtime_error when max_tries is exhausted.
HeightConditioned condition_height(double t_min, double r_min, double r_max,
                                   const Resolution& res, Stream& rng,
                                   std::size_t max_tries = 100000);

struct HeightMassEstimate {
  double estimate = 0.0;  // window mass * accepted / draws
  double stderr_ = 0.0;
  std::size_t accepted = 0;
  std::size_t draws = 0;
  double upper_tail_bound = 0.0;  // N_0[sigma > r_max]
  double lower_tail_mass = 0.0;   // N_0[sup > t, sigma < r_min], by quadrature
};

HeightMassEstimate estimate_height_mass(double t_min, double r_min, double r_max,
                                        const Resolution& res, std::size_t draws,
                                        std::uint64_t seed);

struct LevelBand {
  std::vector<std::size_t> indices;
  double weight = 0.0;
};

// Contour indices i < 2n with zeta_i in [t, t + delta), each of weight ds / delta.
LevelBand local_time_band(const LifetimePath& path, double t, double delta);
inline double default_band_width(const LifetimePath& p) { return std::sqrt(std::sqrt(p.contour_step)); }

}  // namespace snake
