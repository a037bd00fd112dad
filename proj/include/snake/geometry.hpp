#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snake/moments.hpp"
#include "snake/rng.hpp"
#include "snake/snake.hpp"
#include "snake/spatial_index.hpp"

namespace snake {

// Box or ball region in R^d.
struct Region {
  enum class Kind { ball, box } kind = Kind::ball;
  std::vector<double> lo, hi;  // box corners
  std::vector<double> center;  // ball
  double radius = 0.0;

  static Region make_ball(std::vector<double> center, double radius);
  static Region make_box(std::vector<double> lo, std::vector<double> hi);
  std::size_t dimension() const { return kind == Kind::ball ? center.size() : lo.size(); }
  double volume() const;
  bool contains(std::span<const double> x) const;
  void sample(Stream& rng, std::span<double> out) const;
};

struct VolumeEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
};

inline constexpr std::size_t kVolumeChunk = 4096;

// Hit-or-miss |cloud^eps ∩ A|. Sample j of chunk c uses Stream(seed, c).
VolumeEstimate epsilon_volume(const PointCloud& cloud, const Region& A, double eps, std::size_t M,
                              std::uint64_t seed);
// Same with a caller-supplied distance-to-set predicate.
template <class Covered>
VolumeEstimate hit_or_miss(const Region& A, std::size_t M, std::uint64_t seed, Covered&& covered);

// Median nearest-neighbour distance over a sample of points (exact duplicates skipped).
double median_nn_spacing(const PointCloud& cloud, std::size_t sample_size, std::uint64_t seed);

enum class LawKind { range, support };

struct ScalingLaw {
  int dimension = 5;
  double phi(double eps) const;  // eps^{4-d}, log(1/eps) for d = 4
  double support_exponent() const { return 2.0 - dimension; }
};

struct CurveRow {
  double eps = 0.0;
  double value = 0.0;   // normalized volume (or energy)
  double target = 0.0;
  double ratio = 0.0;
  double stderr_ = 0.0; // of value
  bool guarded = true;  // eps respects the resolution guard
};

struct VolumeCurve {
  std::vector<CurveRow> rows;
  double nn_spacing = 0.0;
  double guard_eps = 0.0;     // 5 x median NN spacing
  double fitted_slope = 0.0;  // support mode: d log|K^eps ∩ A| / d log eps
  double slope_stderr = 0.0;
};

// Range mode: value = phi_d(eps) |K^eps ∩ A|, target = C_0 * occupation(A).
VolumeCurve volume_scaling_experiment(const PointCloud& cloud, const WeightedPointMeasure& occupation,
                                      const Region& A, const std::vector<double>& eps_list, const ScalingLaw& law,
                                      double c0, std::size_t M, std::uint64_t seed, double nn_spacing = -1.0);
// Support mode: value = eps^{2-d} |K^eps ∩ A|, slope fitted on log-log.
VolumeCurve support_scaling_experiment(const PointCloud& cloud, const Region& A, const std::vector<double>& eps_list,
                                       std::size_t M, std::uint64_t seed, double nn_spacing = -1.0);

// S_eps(mu) = sum_ij w_i w_j p(eps^2, x_i - x_j).
double s_energy(const WeightedPointMeasure& mu, double eps);

enum class EnergyMode { slice, occupation };

struct EnergyRow {
  double eps = 0.0;
  double value = 0.0;   // eps^{d-gamma} (2 pi)^{d/2} S_eps
  double target = 0.0;  // constant * mass
  double ratio = 0.0;
  double ratio_stderr = 0.0;  // nonzero only for row-sampled sums
};
// rows > 0 and below the atom count switches to the row-sampled pair sum.
std::vector<EnergyRow> energy_scaling_check(const WeightedPointMeasure& mu, const std::vector<double>& eps_list,
                                            int d, EnergyMode mode, std::size_t rows = 0, std::uint64_t seed = 0);
double energy_constant(int d, EnergyMode mode);

struct Kernel {
  enum class Family { power, log_power } family = Family::power;
  double beta = 1.0;
  double operator()(double r) const;
  std::string name() const;
  static Kernel power(double b) { return {Family::power, b}; }
  static Kernel log_power(double b) { return {Family::log_power, b}; }
};

// sum_ij w_i w_j f(|x_i - x_j|) with f(r_cell) on the diagonal.
double f_energy(const WeightedPointMeasure& mu, const Kernel& f, double r_cell);

struct CapacityResult {
  double capacity = 0.0;
  double energy = 0.0;  // minimal nu^T F nu
  std::vector<double> weights;
  std::size_t iterations = 0;
  double gap = 0.0;
  bool converged = false;
  bool monotone = true;  // energy never increased across iterations
  double r_cell = 0.0;
};

inline constexpr std::size_t kMaxCapacityPoints = 6000;

// Frank-Wolfe with exact line search over the probability simplex. r_cell <= 0 means
// use the median nearest-neighbour distance.
CapacityResult capacity(const PointCloud& support, const Kernel& f, double tol = 1e-6, std::size_t max_iters = 200000,
                        double r_cell = -1.0);

struct CubeReference {
  int p = 0, d = 0;
  double volume_limit = 0.0;       // 2 pi^{(d-p)/2} / Gamma((d-p)/2)
  double tube_volume_limit = 0.0;  // volume of the unit (d-p)-ball
  double s_energy_limit = 0.0;     // (2 pi)^{(p-d)/2}
  double kernel_integral = 0.0;    // int_0^1 f(r) r^{p-1} dr
  bool kernel_integral_finite = true;
};
CubeReference cube_reference(int p, int d, const Kernel& f);
// |([0,1]^p x {0})^eps| in R^d via the Steiner formula.
double cube_tube_volume_exact(int p, int d, double eps);
// Hit-or-miss |([0,1]^p x {0})^eps| with the exact distance function.
VolumeEstimate cube_tube_volume_mc(int p, int d, double eps, std::size_t M, std::uint64_t seed);
// Lebesgue measure on [0,1]^p x {0} as an m^p grid of cell-centre atoms.
WeightedPointMeasure cube_lebesgue_grid(int p, int d, std::size_t m);
PointCloud cube_grid_cloud(int p, int d, std::size_t m);

struct EquivalenceRow {
  std::string kernel;
  double cap1 = 0.0;
  double cap2 = 0.0;
  double ratio = 0.0;
};
struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;
  double spread = 0.0;  // max ratio / min ratio
};
EquivalenceReport capacity_equivalence_report(const PointCloud& a, const PointCloud& b,
                                              const std::vector<Kernel>& kernels, double tol = 1e-6);

// ---------------------------------------------------------------------------

template <class Covered>
VolumeEstimate hit_or_miss(const Region& A, std::size_t M, std::uint64_t seed, Covered&& covered) {
  const std::size_t d = A.dimension();
  const std::size_t chunks = (M + kVolumeChunk - 1) / kVolumeChunk;
  std::vector<std::size_t> hits(chunks, 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < chunks; ++c) {
    Stream rng(seed, c);
    std::vector<double> x(d);
    const std::size_t n = std::min(kVolumeChunk, M - c * kVolumeChunk);
    std::size_t h = 0;
    for (std::size_t j = 0; j < n; ++j) {
      A.sample(rng, x);
      if (covered(std::span<const double>(x))) ++h;
    }
    hits[c] = h;
  }
  VolumeEstimate e;
  e.samples = M;
  for (std::size_t h : hits) e.hits += h;
  const double p = M ? static_cast<double>(e.hits) / static_cast<double>(M) : 0.0;
  e.estimate = A.volume() * p;
  e.stderr_ = M ? A.volume() * std::sqrt(p * (1.0 - p) / static_cast<double>(M)) : 0.0;
  return e;
}

}  // namespace snake
