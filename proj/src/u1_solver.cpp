#include "snake/u1_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "snake/stats.hpp"

namespace snake {

namespace {

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) for the two-component system in x = log r.

using State = std::array<double, 2>;

struct WSystem {
  double dm2;  // d - 2
  std::size_t* evals;
  // w = u^{-1/2}:  w'' = (3 w'^2 - 2 e^{2x}) / w - (d-2) w'
  State operator()(double x, const State& y) const {
    ++*evals;
    const double e2x = std::exp(2.0 * x);
    return {y[1], (3.0 * y[1] * y[1] - 2.0 * e2x) / y[0] - dm2 * y[1]};
  }
};

struct Dopri5 {
  double rtol = 1e-12;
  double atol = 1e-300;

  // One attempted step; returns normalized error estimate.
  template <class F>
  double step(const F& f, double x, const State& y, const State& k1, double h, State& y5, State& k7) const {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    State t, k2, k3, k4, k5, k6;
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * a21 * k1[i];
    k2 = f(x + c2 * h, t);
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(x + c3 * h, t);
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(x + c4 * h, t);
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(x + c5 * h, t);
    for (int i = 0; i < 2; ++i)
      t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f(x + h, t);
    for (int i = 0; i < 2; ++i) y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = f(x + h, y5);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err)) err = 1e300;
    return err;
  }
};

struct InwardResult {
  double x_blowup = 0.0;
  std::vector<State> samples;  // at requested output abscissae
};

// Integrates w inward from (x0, y0). Output abscissae must be decreasing and < x0.
// Stops once w <= stop_ratio * e^x past the last output, and extrapolates the zero of w.
InwardResult integrate_inward(int d, double x0, State y0, const std::vector<double>& outputs,
                              double stop_ratio, std::size_t& evals) {
  const WSystem f{static_cast<double>(d - 2), &evals};
  const Dopri5 rk;
  InwardResult res;
  res.samples.reserve(outputs.size());
  double x = x0;
  State y = y0;
  State k1 = f(x, y);
  double h = -1e-2;
  std::size_t next = 0;
  for (std::size_t it = 0; it < 10000000; ++it) {
    if (next >= outputs.size() && y[0] <= stop_ratio * std::exp(x)) {
      res.x_blowup = x - y[0] / y[1];
      return res;
    }
    // Never step past the zero of w: |h| <= w / (2 w').
    double hmax = y[1] > 0.0 ? 0.5 * y[0] / y[1] : 1.0;
    double hh = -std::min(std::abs(h), hmax);
    bool clipped = false;
    if (next < outputs.size() && x + hh <= outputs[next]) {
      hh = outputs[next] - x;
      clipped = true;
    }
    State y5, k7;
    const double err = rk.step(f, x, y, k1, hh, y5, k7);
    if (err <= 1.0 && y5[0] > 0.0) {
      x = clipped ? outputs[next] : x + hh;
      y = y5;
      k1 = k7;
      if (clipped) res.samples.push_back(y), ++next;
      const double fac = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
      h = hh * fac;
    } else {
      h = hh * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.25), 0.1, 0.5);
    }
    if (std::abs(h) < 1e-15) throw std::runtime_error("solve_u1: step size underflow");
  }
  throw std::runtime_error("solve_u1: integration did not reach the blow-up");
}

State far_field(int d, double x) {
  if (d == 4) {
    // u ~ (1 + log x / (2x)) / (2 x r^2), x = log r
    const double f = 1.0 / (2.0 * x) + std::log(x) / (4.0 * x * x);
    const double fp = -1.0 / (2.0 * x * x) + (1.0 - 2.0 * std::log(x)) / (4.0 * x * x * x);
    const double e = std::exp(-2.0 * x);
    const double u = e * f, ux = e * (fp - 2.0 * f);
    return {1.0 / std::sqrt(u), -ux / (2.0 * u * std::sqrt(u))};
  }
  // u = A r^{2-d} + B r^{6-2d}, A = 1
  const double B = 4.0 / ((2.0 * d - 6.0) * (d - 4.0));
  const double p1 = std::exp((2.0 - d) * x), p2 = std::exp((6.0 - 2.0 * d) * x);
  const double u = p1 + B * p2;
  const double ux = (2.0 - d) * p1 + B * (6.0 - 2.0 * d) * p2;
  return {1.0 / std::sqrt(u), -ux / (2.0 * u * std::sqrt(u))};
}

// Fritsch-Carlson slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  return m;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& m,
                  double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  i = std::min(i, x.size() - 2);
  const double h = x[i + 1] - x[i];
  const double s = (t - x[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * m[i] + (-2 * s3 + 3 * s2) * y[i + 1] +
         (s3 - s2) * h * m[i + 1];
}

constexpr double kPi = std::numbers::pi;

}  // namespace

// ---------------------------------------------------------------------------

RadialSolution::RadialSolution(int d, std::vector<double> r, std::vector<double> u, std::vector<double> du,
                               ShootingInfo info)
    : d_(d), r_(std::move(r)), u_(std::move(u)), du_(std::move(du)), info_(info) {
  if (r_.size() < 4 || r_.size() != u_.size() || r_.size() != du_.size())
    throw std::invalid_argument("RadialSolution: inconsistent tables");
  xi_.resize(r_.size());
  logu_.resize(r_.size());
  slope_.resize(r_.size());
  for (std::size_t i = 0; i < r_.size(); ++i) {
    xi_[i] = std::log(r_[i] - 1.0);
    logu_[i] = std::log(u_[i]);
    slope_[i] = r_[i] * du_[i] / u_[i];
  }
  m_logu_ = pchip_slopes(xi_, logu_);
  m_slope_ = pchip_slopes(xi_, slope_);
}

double RadialSolution::u1(double rho) const {
  if (!(rho > 1.0)) return std::numeric_limits<double>::infinity();
  if (rho < r_.front()) {
    const double h0 = r_.front() - 1.0;
    return u_.front() * (h0 * h0) / ((rho - 1.0) * (rho - 1.0));
  }
  if (rho > r_.back()) {
    const double R = r_.back();
    const double v = u_.back() * std::pow(R / rho, d_ - 2);
    return d_ == 4 ? v * std::log(R) / std::log(rho) : v;
  }
  return std::exp(pchip_eval(xi_, logu_, m_logu_, std::log(rho - 1.0)));
}

double RadialSolution::log_slope(double rho) const {
  if (!(rho > 1.0)) return -std::numeric_limits<double>::infinity();
  if (rho < r_.front()) return -2.0 * rho / (rho - 1.0);
  if (rho > r_.back()) return d_ == 4 ? -2.0 - 1.0 / std::log(rho) : -(d_ - 2.0);
  return pchip_eval(xi_, slope_, m_slope_, std::log(rho - 1.0));
}

bool RadialSolution::decreasing() const {
  for (std::size_t i = 0; i + 1 < u_.size(); ++i)
    if (!(u_[i + 1] < u_[i]) || !(u_[i] > 0.0)) return false;
  return u_.back() > 0.0;
}

bool RadialSolution::scaled_decreasing() const {
  for (std::size_t i = 0; i + 1 < u_.size(); ++i) {
    const double a = u_[i] * std::pow(r_[i], d_ - 2), b = u_[i + 1] * std::pow(r_[i + 1], d_ - 2);
    if (!(b <= a)) return false;
  }
  return true;
}

RadialSolution solve_u1(int d, double h, double R_max, double tol, std::size_t grid_points) {
  if (d < 4) throw std::invalid_argument("solve_u1: d must be >= 4");
  if (!(h > 0.0 && h < 0.1)) throw std::invalid_argument("solve_u1: need 0 < h << 1");
  if (!(R_max > 10.0)) throw std::invalid_argument("solve_u1: R_max must exceed 10");
  if (grid_points < 16) throw std::invalid_argument("solve_u1: too few grid points");

  ShootingInfo info;
  // Start far enough out that the neglected far-field terms are below rounding
  // after the shift, and that backward transients have decayed for d = 4.
  const double x_far = d == 4 ? std::log(R_max) + 40.0 : std::log(R_max) + 40.0 / (d - 4.0) + 5.0;
  const State y_far = far_field(d, x_far);

  std::size_t evals = 0;
  // Pass 1: locate the blow-up of the far-field solution.
  double shift = integrate_inward(d, x_far, y_far, {}, 1e-6, evals).x_blowup;

  // Output grid: r_i = 1 + exp(xi_i), decreasing order for the inward sweep.
  std::vector<double> xs(grid_points);
  const double xi0 = std::log(h), xi1 = std::log(R_max - 1.0);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double xi = xi0 + (xi1 - xi0) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    xs[grid_points - 1 - i] = std::log1p(std::exp(xi));
  }
  xs.front() = std::log(R_max);
  xs.back() = std::log1p(h);

  // Pass 2+: shift so that the blow-up sits at x = 0, tabulate, re-measure.
  InwardResult tab;
  for (int pass = 1;; ++pass) {
    const double rho = std::exp(shift);
    const State y0 = {y_far[0] / rho, y_far[1] / rho};
    tab = integrate_inward(d, x_far - shift, y0, xs, 1e-4 * h, evals);
    info.iterations = pass;
    info.boundary_offset = std::abs(tab.x_blowup);
    if (info.boundary_offset <= tol) break;
    if (pass >= 8) throw std::runtime_error("solve_u1: blow-up location did not converge to tol");
    shift += tab.x_blowup;
  }
  info.far_radius = std::exp(x_far - shift);
  info.a0 = d == 4 ? 0.5 : std::exp((4.0 - d) * shift);
  info.rhs_evaluations = evals;

  const std::size_t n = xs.size();
  std::vector<double> r(n), u(n), du(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = n - 1 - k;  // ascending radii
    const double x = xs[k];
    const double w = tab.samples[k][0], wx = tab.samples[k][1];
    r[i] = std::exp(x);
    u[i] = 1.0 / (w * w);
    du[i] = -2.0 * wx / (w * w * w) / r[i];
  }
  r.front() = 1.0 + h;
  RadialSolution sol(d, std::move(r), std::move(u), std::move(du), info);
  if (!sol.decreasing()) throw std::runtime_error("solve_u1: monotonicity certificate failed (u)");
  if (d >= 5 && !sol.scaled_decreasing())
    throw std::runtime_error("solve_u1: monotonicity certificate failed (r^{d-2} u)");
  return sol;
}

double c0_constant(int d, double a0) { return a0 * 2.0 * std::pow(kPi, d / 2.0) / std::tgamma((d - 2) / 2.0); }

BoundsReport certify_bounds(const RadialSolution& sol, double a0, double a0_error) {
  const int d = sol.dimension();
  BoundsReport rep;
  rep.constants.dimension = d;
  rep.constants.a0_ode = sol.info().a0;
  rep.constants.c0 = c0_constant(d, a0);
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  const auto& r = sol.radii();
  const auto& u = sol.values();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double lower = d == 4 ? 1.0 / (2.0 * r[i] * r[i] * std::log(2.0 * r[i]))
                                : (a0 - a0_error) * std::pow(r[i], 2.0 - d);
    rep.worst_ratio = std::min(rep.worst_ratio, u[i] / lower);
    if (!(u[i] >= lower)) {
      rep.lower_bound_ok = false;
      ++rep.violations;
    }
    if (r[i] >= 4.0 / 3.0) {
      if (d == 4) {
        const double L = std::log(r[i]);
        rep.constants.b0 = std::max(rep.constants.b0, u[i] * r[i] * r[i] * L);
        if (r[i] >= std::exp(2.0)) {
          const double excess = (u[i] - a0 / (r[i] * r[i] * L)) * r[i] * r[i] * L * L / std::log(L);
          rep.constants.b1_prime = std::max(rep.constants.b1_prime, excess);
        }
      } else {
        rep.constants.b0 = std::max(rep.constants.b0, u[i] * std::pow(r[i], d - 2.0));
        rep.constants.b1_prime =
            std::max(rep.constants.b1_prime, (u[i] - a0 * std::pow(r[i], 2.0 - d)) * std::pow(r[i], 2.0 * d - 6.0));
      }
    }
  }
  rep.monotone_ok = sol.decreasing() && (d == 4 || sol.scaled_decreasing());
  return rep;
}

double d4_envelope_residual(const RadialSolution& sol, double r) {
  const double L = std::log(r);
  return r * r * L * sol.u1(r) - 0.5 - std::log(L) / (4.0 * L);
}

D4Flow d4_flow(const RadialSolution& sol, double r) {
  const double u = sol.u1(r);
  const double g = sol.log_slope(r);
  // z = r^2 u, dz/dx = r^2 u (g + 2), s = 2x
  return {r * r * u, 0.5 * r * r * u * (g + 2.0)};
}

double u_eps_radial(const RadialSolution& sol, double dist, double eps) {
  if (!(dist > eps)) throw std::domain_error("u_eps: point inside the closed ball");
  return sol.u1(dist / eps) / (eps * eps);
}

double u_eps(const RadialSolution& sol, std::span<const double> y, double eps) {
  double s = 0.0;
  for (double c : y) s += c * c;
  return u_eps_radial(sol, std::sqrt(s), eps);
}

std::vector<double> drift(const RadialSolution& sol, std::span<const double> z, double eps) {
  double s = 0.0;
  for (double c : z) s += c * c;
  const double norm = std::sqrt(s);
  if (!(norm > eps)) throw std::domain_error("drift: point inside the closed ball");
  // grad u_eps / u_eps = u_1'(rho) / (eps u_1(rho)) zhat = g(rho) / |z| zhat
  const double mag = sol.log_slope(norm / eps) / norm;
  std::vector<double> v(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = mag * z[i] / norm;
  return v;
}

HittingRun simulate_hitting_diffusion(const RadialSolution& sol, std::span<const double> x0,
                                      std::span<const double> center, double eps, double dt, Stream& rng,
                                      std::size_t max_steps, double guard, bool record_path) {
  const std::size_t d = x0.size();
  if (center.size() != d) throw std::invalid_argument("simulate_hitting_diffusion: dimension mismatch");
  if (guard < 0.0) guard = 2.0 * std::sqrt(dt);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < d; ++i) z[i] = x0[i] - center[i];
  auto norm = [&] {
    double s = 0.0;
    for (double c : z) s += c * c;
    return std::sqrt(s);
  };
  double rz = norm();
  if (!(rz > eps)) throw std::domain_error("simulate_hitting_diffusion: start inside the ball");
  HittingRun run;
  const double sq = std::sqrt(dt);
  auto record = [&] {
    if (record_path)
      for (std::size_t i = 0; i < d; ++i) run.path.push_back(z[i] + center[i]);
  };
  record();
  while (rz > eps + guard && run.steps < max_steps) {
    const double mag = sol.log_slope(rz / eps) / rz;
    for (std::size_t i = 0; i < d; ++i) z[i] += mag * z[i] / rz * dt + sq * rng.normal();
    ++run.steps;
    run.time += dt;
    rz = norm();
    if (rz < eps) {
      for (double& c : z) c *= eps / rz;
      rz = eps;
    }
    record();
  }
  run.exited = rz <= eps + guard;
  run.exit_radius = rz;
  run.exit_point.resize(d);
  for (std::size_t i = 0; i < d; ++i) run.exit_point[i] = z[i] + center[i];
  return run;
}

FeynmanKacResult verify_feynman_kac(const RadialSolution& sol, std::span<const double> center, double eps,
                                    std::size_t M, std::uint64_t seed, const FeynmanKacOptions& opts) {
  const std::size_t d = center.size();
  double c2 = 0.0;
  for (double c : center) c2 += c * c;
  if (!(std::sqrt(c2) > eps)) throw std::domain_error("verify_feynman_kac: need |x| > eps");
  std::vector<double> main(M), cont(M);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t p = 0; p < M; ++p) {
    Stream rng(seed, p);
    std::vector<double> z(center.begin(), center.end());  // beta - x, beta_0 = 0
    for (double& c : z) c = -c;
    double rz = std::sqrt(c2);
    double t = 0.0, I = 0.0, J = 0.0;
    double u = u_eps_radial(sol, rz, eps);
    double e = 1.0;
    while (true) {
      const double gap = rz - eps;
      if (t >= opts.horizon || rz >= opts.far_radius || gap <= opts.min_gap || e * u < 1e-12) break;
      const double dt = std::min({opts.dt_max, opts.kappa * gap * gap, opts.horizon - t});
      const double sq = std::sqrt(dt);
      std::vector<double> zn(z);
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        zn[i] += sq * rng.normal();
        s += zn[i] * zn[i];
      }
      const double rn = std::sqrt(s);
      if (rn <= eps) break;  // crossed the sphere inside one step: stop at the last point
      const double un = u_eps_radial(sol, rn, eps);
      const double In = I + 0.5 * dt * (u + un);
      const double en = std::exp(-4.0 * In);
      J += dt * (u * u * e + un * un * en);  // trapezoid of 2 u^2 e^{-4I}
      z.swap(zn);
      rz = rn;
      u = un;
      I = In;
      e = en;
      t += dt;
    }
    main[p] = J;
    cont[p] = e * u;
  }
  FeynmanKacResult res;
  res.paths = M;
  res.lhs = u_eps_radial(sol, std::sqrt(c2), eps);
  const Estimate a = mean_estimate(main), b = mean_estimate(cont);
  res.mc = a.value;
  res.stderr_ = a.stderr_;
  res.tail = b.value;
  res.tail_stderr = b.stderr_;
  res.tail_bound = b.value + 3.0 * b.stderr_;
  return res;
}

double conditioned_hitting_survival(const RadialSolution& sol, std::span<const double> times,
                                    std::span<const double> points, std::span<const double> y, double eps) {
  const std::size_t d = y.size();
  if (points.size() != times.size() * d) throw std::invalid_argument("conditioned_hitting_survival: size mismatch");
  if (times.size() < 2) return 0.0;
  auto dist = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = points[k * d + i] - y[i];
      s += c * c;
    }
    return std::sqrt(s);
  };
  double integral = 0.0;
  double prev = dist(0);
  if (prev <= eps) return 1.0;
  double uprev = u_eps_radial(sol, prev, eps);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double r = dist(k);
    if (r <= eps) return 1.0;
    const double uk = u_eps_radial(sol, r, eps);
    integral += 0.5 * (times[k] - times[k - 1]) * (uprev + uk);
    uprev = uk;
  }
  return -std::expm1(-2.0 * integral);
}

}  // namespace snake
