#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "snake/rng.hpp"

namespace snake {

struct ShootingInfo {
  int iterations = 0;          // re-scaling passes until the blow-up sat at r = 1
  double boundary_offset = 0;  // |log(blow-up radius)| of the final tabulated solution
  double far_radius = 0;       // radius where the inward integration started
  double a0 = 0;               // r^{d-2} u (d >= 5) read off the far-field data; 1/2 for d = 4
  std::size_t rhs_evaluations = 0;
};

/// Maximal solution u_1 of u'' + (d-1)/r u' = 4u^2 on r > 1, tabulated on
/// r_i = 1 + exp(xi_i) with xi uniformly spaced in [log h, log(R_max - 1)].
class RadialSolution {
 public:
  RadialSolution() = default;
  RadialSolution(int d, std::vector<double> r, std::vector<double> u, std::vector<double> du, ShootingInfo info);

  int dimension() const { return d_; }
  std::size_t size() const { return r_.size(); }
  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& values() const { return u_; }
  const std::vector<double>& derivatives() const { return du_; }
  const ShootingInfo& info() const { return info_; }
  double r_min() const { return r_.front(); }
  double r_max() const { return r_.back(); }

  // u_1(rho) for rho > 1; +inf for rho <= 1. Beyond the grid: blow-up law near 1,
  // leading far-field law past R_max.
  double u1(double rho) const;
  // rho u_1'(rho) / u_1(rho).
  double log_slope(double rho) const;
  double du1(double rho) const { return u1(rho) * log_slope(rho) / rho; }

  bool decreasing() const;
  bool scaled_decreasing() const;  // r^{d-2} u decreasing

 private:
  int d_ = 0;
  std::vector<double> r_, u_, du_;
  std::vector<double> xi_, logu_, slope_;  // interpolation tables
  std::vector<double> m_logu_, m_slope_;   // PCHIP derivatives
  ShootingInfo info_;
};

// Inward shooting from the far field (see README for the method).
RadialSolution solve_u1(int d, double h = 1e-6, double R_max = 1e3, double tol = 1e-9,
                        std::size_t grid_points = 4000);

struct Constants {
  int dimension = 0;
  double a0_series = std::numeric_limits<double>::quiet_NaN();
  double a0_series_error = 0.0;
  double a0_ode = std::numeric_limits<double>::quiet_NaN();
  double c0 = 0.0;
  double b0 = 0.0;
  double b1_prime = 0.0;
  double alpha0 = std::numeric_limits<double>::quiet_NaN();
};

struct BoundsReport {
  Constants constants;
  bool lower_bound_ok = true;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // min over grid of u / lower bound
  bool monotone_ok = true;
};

// d >= 5: checks u >= (a0 - a0_error) r^{2-d}; d = 4: u >= [2 r^2 log 2r]^{-1}.
BoundsReport certify_bounds(const RadialSolution& sol, double a0, double a0_error);

double c0_constant(int d, double a0);

// r^2 log r u - 1/2 - log log r / (4 log r) for d = 4.
double d4_envelope_residual(const RadialSolution& sol, double r);

// d = 4: z = r^2 u and dz/ds with s = 2 log r.
struct D4Flow {
  double w = 0.0;
  double dw_ds = 0.0;
};
D4Flow d4_flow(const RadialSolution& sol, double r);

double u_eps_radial(const RadialSolution& sol, double dist, double eps);
double u_eps(const RadialSolution& sol, std::span<const double> y, double eps);
std::vector<double> drift(const RadialSolution& sol, std::span<const double> z, double eps);

struct HittingRun {
  bool exited = false;
  std::size_t steps = 0;
  double time = 0.0;
  double exit_radius = 0.0;
  std::vector<double> exit_point;
  std::vector<double> path;  // filled when record_path
};

// Euler-Maruyama for dx = dB + grad u_eps / u_eps (x - center) dt, stopped once
// |x - center| <= eps + guard. Overshoots into the ball are projected to the sphere.
HittingRun simulate_hitting_diffusion(const RadialSolution& sol, std::span<const double> x0,
                                      std::span<const double> center, double eps, double dt,
                                      Stream& rng, std::size_t max_steps, double guard = -1.0,
                                      bool record_path = false);

struct FeynmanKacOptions {
  double horizon = 200.0;      // T
  double kappa = 0.01;         // dt = min(dt_max, kappa * dist^2), dist to the sphere
  double dt_max = 0.05;
  double far_radius = 40.0;    // stop when |beta - x| exceeds this
  double min_gap = 1e-7;       // stop when |beta - x| - eps falls below this
};

struct FeynmanKacResult {
  double lhs = 0.0;        // u_eps(x)
  double mc = 0.0;         // mean of 2 int_0^S u^2 exp(-4 int u)
  double stderr_ = 0.0;
  double tail = 0.0;       // mean of the continuation exp(-4 I_S) u(beta_S)
  double tail_stderr = 0.0;
  double tail_bound = 0.0; // tail + 3 tail_stderr
  std::size_t paths = 0;
};

// Paths of plain Brownian motion from the origin; center x with |x| > eps.
FeynmanKacResult verify_feynman_kac(const RadialSolution& sol, std::span<const double> center, double eps,
                                    std::size_t M, std::uint64_t seed, const FeynmanKacOptions& opts = {});

// 1 - exp(-2 int_0^zeta u_eps(w(s) - y) ds) by the trapezoid rule; 1 once the path
// reaches the closed ball.
double conditioned_hitting_survival(const RadialSolution& sol, std::span<const double> times,
                                    std::span<const double> points, std::span<const double> y, double eps);

}  // namespace snake
