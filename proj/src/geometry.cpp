#include "snake/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "snake/kernels.hpp"
#include "snake/stats.hpp"

namespace snake {

namespace {
constexpr double kPi = std::numbers::pi;

double region_mass(const WeightedPointMeasure& mu, const Region& A) {
  double m = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (A.contains(mu.point(i))) m += mu.weight(i);
  return m;
}
}  // namespace

// ---------------------------------------------------------------------------
// Regions

Region Region::make_ball(std::vector<double> center, double radius) {
  if (!(radius > 0.0) || center.empty()) throw std::invalid_argument("Region: bad ball");
  Region r;
  r.kind = Kind::ball;
  r.center = std::move(center);
  r.radius = radius;
  return r;
}

Region Region::make_box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("Region: bad box");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(hi[i] > lo[i])) throw std::invalid_argument("Region: empty box");
  Region r;
  r.kind = Kind::box;
  r.lo = std::move(lo);
  r.hi = std::move(hi);
  return r;
}

double Region::volume() const {
  if (kind == Kind::ball) return unit_ball_volume(static_cast<int>(center.size())) * std::pow(radius, center.size());
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Region::contains(std::span<const double> x) const {
  if (kind == Kind::ball) {
    double s = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
    return s <= radius * radius;
  }
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

void Region::sample(Stream& rng, std::span<double> out) const {
  const std::size_t d = dimension();
  if (kind == Kind::box) {
    for (std::size_t i = 0; i < d; ++i) out[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    return;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = rng.normal();
    s += out[i] * out[i];
  }
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::sqrt(s);
  for (std::size_t i = 0; i < d; ++i) out[i] = center[i] + r * out[i];
}

VolumeEstimate epsilon_volume(const PointCloud& cloud, const Region& A, double eps, std::size_t M,
                              std::uint64_t seed) {
  if (!(eps > 0.0) || M == 0) throw std::invalid_argument("epsilon_volume: need eps > 0 and M >= 1");
  return kernels::epsilon_volume(cloud, A, eps, M, seed);
}

double median_nn_spacing(const PointCloud& cloud_in, std::size_t sample_size, std::uint64_t seed) {
  const PointCloud cloud = deduplicate(cloud_in);
  const std::size_t n = cloud.size(), d = cloud.dimension();
  if (n < 2) throw std::invalid_argument("median_nn_spacing: need at least two distinct points");
  std::vector<double> lo(d, 1e300), hi(d, -1e300);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], cloud.point(i)[c]);
      hi[c] = std::max(hi[c], cloud.point(i)[c]);
    }
  // flat clouds (a sheet in R^5) would give a vanishing cell, so size it on the occupied axes only
  double span = 0.0;
  for (std::size_t c = 0; c < d; ++c) span = std::max(span, hi[c] - lo[c]);
  double vol = 1.0;
  int eff = 0;
  for (std::size_t c = 0; c < d; ++c)
    if (hi[c] - lo[c] > 1e-9 * span) {
      vol *= hi[c] - lo[c];
      ++eff;
    }
  double cell = eff > 0 ? std::pow(vol / static_cast<double>(n), 1.0 / eff) : 1.0;
  Stream rng(seed, 0);
  std::vector<std::size_t> picks(std::min(sample_size, n));
  for (auto& p : picks) p = rng.below(n);
  for (int attempt = 0; attempt < 40; ++attempt) {
    const SpatialIndex index(cloud, cell);
    std::vector<double> dists;
    std::size_t missing = 0;
    for (std::size_t p : picks) {
      const double r = index.nearest_distance(cloud.point(p), p, 2);
      if (std::isfinite(r)) dists.push_back(r);
      else ++missing;
    }
    if (missing * 100 <= picks.size() && !dists.empty()) {
      const double med = median(dists);
      if (med <= 2.0 * cell) return med;
      cell = med;
    } else {
      cell *= 2.0;
    }
  }
  throw std::runtime_error("median_nn_spacing: failed to size the search grid");
}

double ScalingLaw::phi(double eps) const {
  if (dimension == 4) return std::log(1.0 / eps);
  return std::pow(eps, 4.0 - dimension);
}

VolumeCurve volume_scaling_experiment(const PointCloud& cloud, const WeightedPointMeasure& occupation,
                                      const Region& A, const std::vector<double>& eps_list, const ScalingLaw& law,
                                      double c0, std::size_t M, std::uint64_t seed, double nn_spacing) {
  for (std::size_t k = 1; k < eps_list.size(); ++k)
    if (!(eps_list[k] < eps_list[k - 1])) throw std::invalid_argument("volume_scaling_experiment: eps_list must decrease");
  VolumeCurve curve;
  curve.nn_spacing = nn_spacing > 0.0 ? nn_spacing : median_nn_spacing(cloud, 4000, derive_seed(seed, 0x4e4e));
  curve.guard_eps = 5.0 * curve.nn_spacing;
  const double target = c0 * region_mass(occupation, A);
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    const VolumeEstimate v = epsilon_volume(cloud, A, eps, M, derive_seed(seed, k + 1));
    CurveRow row;
    row.eps = eps;
    row.value = law.phi(eps) * v.estimate;
    row.stderr_ = law.phi(eps) * v.stderr_;
    row.target = target;
    row.ratio = target > 0.0 ? row.value / target : 0.0;
    row.guarded = eps >= curve.guard_eps;
    curve.rows.push_back(row);
  }
  return curve;
}

VolumeCurve support_scaling_experiment(const PointCloud& cloud, const Region& A, const std::vector<double>& eps_list,
                                       std::size_t M, std::uint64_t seed, double nn_spacing) {
  VolumeCurve curve;
  const int d = static_cast<int>(A.dimension());
  curve.nn_spacing = nn_spacing > 0.0 ? nn_spacing : median_nn_spacing(cloud, 4000, derive_seed(seed, 0x4e4e));
  curve.guard_eps = 5.0 * curve.nn_spacing;
  std::vector<double> lx, ly, ax, ay;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    const VolumeEstimate v = epsilon_volume(cloud, A, eps, M, derive_seed(seed, k + 1));
    CurveRow row;
    row.eps = eps;
    row.value = std::pow(eps, 2.0 - d) * v.estimate;
    row.stderr_ = std::pow(eps, 2.0 - d) * v.stderr_;
    row.guarded = eps >= curve.guard_eps;
    curve.rows.push_back(row);
    if (v.estimate > 0.0) {
      ax.push_back(std::log(eps));
      ay.push_back(std::log(v.estimate));
      if (row.guarded) {
        lx.push_back(ax.back());
        ly.push_back(ay.back());
      }
    }
  }
  if (lx.size() < 2) {
    lx = ax;
    ly = ay;
  }
  if (lx.size() >= 2) {
    const LineFit fit = fit_line(lx, ly);
    curve.fitted_slope = fit.slope;
    curve.slope_stderr = fit.slope_stderr;
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Energies

double s_energy(const WeightedPointMeasure& mu, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("s_energy: eps must be positive");
  const double norm = std::pow(2.0 * kPi * eps * eps, -0.5 * static_cast<double>(mu.dimension()));
  return norm * kernels::gaussian_pair_sum(mu, eps);
}

double energy_constant(int d, EnergyMode mode) {
  return mode == EnergyMode::slice ? 4.0 / (d - 2.0) : 16.0 / ((d - 2.0) * (d - 4.0));
}

std::vector<EnergyRow> energy_scaling_check(const WeightedPointMeasure& mu, const std::vector<double>& eps_list,
                                            int d, EnergyMode mode, std::size_t rows, std::uint64_t seed) {
  if (mode == EnergyMode::occupation && d < 5) throw std::invalid_argument("energy_scaling_check: occupation mode needs d >= 5");
  if (d < 3) throw std::invalid_argument("energy_scaling_check: d must be >= 3");
  const double gamma = mode == EnergyMode::slice ? 2.0 : 4.0;
  const bool sampled = rows > 0 && rows < mu.size();
  std::vector<EnergyRow> rows_out;
  const double target = energy_constant(d, mode) * mu.total_mass();
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    if (!(eps > 0.0)) throw std::invalid_argument("energy_scaling_check: eps must be positive");
    // (2 pi)^{d/2} p(eps^2, .) = eps^{-d} exp(-r^2 / (2 eps^2))
    const double scale = std::pow(eps, -gamma);
    EnergyRow r;
    r.eps = eps;
    if (sampled) {
      const Estimate e = kernels::gaussian_pair_sum_sampled(mu, eps, rows, derive_seed(seed, k));
      r.value = scale * e.value;
      r.ratio_stderr = target > 0.0 ? scale * e.stderr_ / target : 0.0;
    } else {
      r.value = mu.empty() ? 0.0 : scale * kernels::gaussian_pair_sum(mu, eps);
    }
    r.target = target;
    r.ratio = target > 0.0 ? r.value / target : 0.0;
    rows_out.push_back(r);
  }
  return rows_out;
}

double Kernel::operator()(double r) const {
  if (family == Family::power) return std::pow(r, -beta);
  return std::pow(std::log1p(1.0 / r), beta);
}

std::string Kernel::name() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s(%g)", family == Family::power ? "power" : "log_power", beta);
  return buf;
}

double f_energy(const WeightedPointMeasure& mu, const Kernel& f, double r_cell) {
  if (!(r_cell > 0.0)) throw std::invalid_argument("f_energy: r_cell must be positive");
  return kernels::kernel_pair_sum(mu, f, r_cell);
}

// ---------------------------------------------------------------------------
// Cubes

CubeReference cube_reference(int p, int d, const Kernel& f) {
  if (p < 1 || p > d) throw std::invalid_argument("cube_reference: need 1 <= p <= d");
  CubeReference c;
  c.p = p;
  c.d = d;
  const int k = d - p;
  if (k == 0) {
    c.volume_limit = 1.0;
    c.tube_volume_limit = 1.0;
  } else {
    c.volume_limit = 2.0 * std::pow(kPi, k / 2.0) / std::tgamma(k / 2.0);
    c.tube_volume_limit = unit_ball_volume(k);
  }
  c.s_energy_limit = std::pow(2.0 * kPi, (p - d) / 2.0);
  if (f.family == Kernel::Family::power && f.beta >= p) {
    c.kernel_integral = std::numeric_limits<double>::infinity();
    c.kernel_integral_finite = false;
  } else {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    c.kernel_integral = gauss_kronrod<double, 31>::integrate(
        [&](double r) { return r > 0.0 ? f(r) * std::pow(r, p - 1) : 0.0; }, 0.0, 1.0, 30, 1e-10, &err);
    c.kernel_integral_finite = std::isfinite(c.kernel_integral);
  }
  return c;
}

double cube_tube_volume_exact(int p, int d, double eps) {
  // Steiner: sum_j V_j([0,1]^p) kappa_{d-j} eps^{d-j}, V_j = binom(p, j).
  double v = 0.0;
  for (int j = 0; j <= p; ++j) {
    const double binom = std::tgamma(p + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(p - j + 1.0));
    const double kappa = d - j == 0 ? 1.0 : unit_ball_volume(d - j);
    v += binom * kappa * std::pow(eps, d - j);
  }
  return v;
}

VolumeEstimate cube_tube_volume_mc(int p, int d, double eps, std::size_t M, std::uint64_t seed) {
  std::vector<double> lo(static_cast<std::size_t>(d), -eps), hi(static_cast<std::size_t>(d), eps);
  for (int i = 0; i < p; ++i) hi[static_cast<std::size_t>(i)] = 1.0 + eps;
  const Region box = Region::make_box(lo, hi);
  const double e2 = eps * eps;
  return hit_or_miss(box, M, seed, [&](std::span<const double> x) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double c = x[static_cast<std::size_t>(i)];
      const double gap = i < p ? std::max({0.0, -c, c - 1.0}) : c;
      s += gap * gap;
    }
    return s <= e2;
  });
}

WeightedPointMeasure cube_lebesgue_grid(int p, int d, std::size_t m) {
  WeightedPointMeasure mu(static_cast<std::size_t>(d));
  const double w = std::pow(1.0 / static_cast<double>(m), p);
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  std::size_t total = 1;
  for (int i = 0; i < p; ++i) total *= m;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (int i = 0; i < p; ++i) {
      x[static_cast<std::size_t>(i)] = (static_cast<double>(c % m) + 0.5) / static_cast<double>(m);
      c /= m;
    }
    mu.add(x, w);
  }
  return mu;
}

PointCloud cube_grid_cloud(int p, int d, std::size_t m) { return support_cloud(cube_lebesgue_grid(p, d, m)); }

EquivalenceReport capacity_equivalence_report(const PointCloud& a, const PointCloud& b,
                                              const std::vector<Kernel>& kernels, double tol) {
  if (a.empty() || b.empty()) throw std::invalid_argument("capacity_equivalence_report: empty support");
  EquivalenceReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Kernel& f : kernels) {
    EquivalenceRow row;
    row.kernel = f.name();
    row.cap1 = capacity(a, f, tol).capacity;
    row.cap2 = capacity(b, f, tol).capacity;
    row.ratio = row.cap1 / row.cap2;
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    rep.rows.push_back(row);
  }
  rep.spread = kernels.empty() ? 1.0 : hi / lo;
  return rep;
}

}  // namespace snake
