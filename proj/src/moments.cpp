#include "snake/moments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace snake {

namespace {
constexpr double kPi = std::numbers::pi;

double dist(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Finite intervals are mapped onto [0, 1]: short intervals far from 0 otherwise
// stall the adaptive error estimate.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-11) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  if (std::isinf(b)) return gauss_kronrod<double, 31>::integrate(f, a, b, 25, tol, &err);
  const double w = b - a;
  auto g = [&](double v) { return f(a + w * v); };
  return w * gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 25, tol, &err);
}

// Potential of the uniform ball of radius rho at distance R from its center
// (without the Green constant): int_B |y - z|^{2-d} dz.
double ball_potential(int d, double rho, double R) {
  if (R >= rho) return unit_ball_volume(d) * std::pow(rho, d) * std::pow(R, 2.0 - d);
  return unit_sphere_area(d) * (rho * rho / 2.0 - (d - 2.0) * R * R / (2.0 * d));
}
}  // namespace

std::vector<MomentTable> h_hierarchy(const PiecewisePolynomial& phi, std::size_t N, const mpq_class& t_star) {
  if (N < 1) throw std::invalid_argument("h_hierarchy: N must be >= 1");
  if (t_star < phi.breakpoints().front() || t_star > phi.breakpoints().back())
    throw std::invalid_argument("h_hierarchy: t_star outside the domain of phi");
  std::vector<PiecewisePolynomial> h;
  h.push_back(phi.antiderivative());
  for (std::size_t n = 2; n <= N; ++n) {
    PiecewisePolynomial acc = h[0] * h[n - 2];
    for (std::size_t k = 2; k <= n - 1; ++k) acc = acc + h[k - 1] * h[n - k - 1];
    h.push_back(acc.antiderivative().scaled(2));
  }
  std::vector<MomentTable> out;
  mpz_class fact = 1;
  for (std::size_t n = 1; n <= N; ++n) {
    fact *= static_cast<unsigned long>(n);
    MomentTable m;
    m.order = n;
    m.h = h[n - 1];
    m.t_star = t_star;
    m.moment = mpq_class(fact) * m.h(t_star);
    out.push_back(std::move(m));
  }
  return out;
}

mpq_class second_moment_closed_form(const mpq_class& t, const mpq_class& T) {
  const mpq_class a = T - t;
  return 4 * (a * a * a / 3 + a * a * t);
}

double Ball::volume() const { return unit_ball_volume(static_cast<int>(dimension())) * std::pow(radius, dimension()); }

double unit_sphere_area(int d) { return 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0); }
double unit_ball_volume(int d) { return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0); }

double green_constant(int d) {
  if (d < 3) throw std::invalid_argument("green_constant: d must be >= 3");
  return std::tgamma((d - 2) / 2.0) / (2.0 * std::pow(kPi, d / 2.0));
}

double green(std::span<const double> x, std::span<const double> y) {
  const int d = static_cast<int>(x.size());
  return green_constant(d) * std::pow(dist(x, y), 2.0 - d);
}

double heat_kernel(double t, std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::pow(2.0 * kPi * t, -0.5 * static_cast<double>(x.size())) * std::exp(-s / (2.0 * t));
}

double occupation_first_moment(std::span<const double> x, const Ball& A) {
  const int d = static_cast<int>(x.size());
  const double cg = green_constant(d);
  if (A.radius <= 0.0) return 0.0;
  const double D = dist(x, A.center);
  const double rho = A.radius;
  // Fraction of the sphere |y - x| = s lying in A.
  auto frac = [&](double s) {
    if (s <= rho - D) return 1.0;
    if (D == 0.0) return s <= rho ? 1.0 : 0.0;
    const double kappa = (D * D + s * s - rho * rho) / (2.0 * s * D);
    if (kappa >= 1.0) return 0.0;
    if (kappa <= -1.0) return 1.0;
    // 1 - kappa^2 without cancellation (small balls put kappa next to 1)
    const double one_minus = (rho - (s - D)) * (rho + (s - D)) / (2.0 * s * D);
    const double one_plus = ((s + D) - rho) * ((s + D) + rho) / (2.0 * s * D);
    const double half = 0.5 * boost::math::ibeta((d - 1) / 2.0, 0.5, std::clamp(one_minus * one_plus, 0.0, 1.0));
    return kappa >= 0.0 ? half : 1.0 - half;
  };
  auto f = [&](double s) { return s * frac(s); };
  double total = 0.0;
  const double lo = std::max(0.0, D - rho), hi = D + rho;
  if (D < rho) total += (rho - D) * (rho - D) / 2.0 + integrate(f, rho - D, hi);
  else total += integrate(f, lo, hi);
  return cg * unit_sphere_area(d) * total;
}

double occupation_first_moment_closed(std::span<const double> x, const Ball& A) {
  const int d = static_cast<int>(x.size());
  return green_constant(d) * ball_potential(d, A.radius, dist(x, A.center));
}

double occupation_second_moment(std::span<const double> x, const Ball& A) {
  const int d = static_cast<int>(x.size());
  if (A.radius <= 0.0) return 0.0;
  const double cg = green_constant(d);
  const double D = dist(x, A.center);
  const double rho = A.radius;
  // Spherical means of G(x, .) over |y - c| = R equal c_G max(D, R)^{2-d} (Newton).
  auto f = [&](double R) {
    const double v = cg * ball_potential(d, rho, R);
    return std::pow(R, d - 1.0) * std::pow(std::max(D, R), 2.0 - d) * v * v;
  };
  double a = std::min(D, rho), b = std::max(D, rho);
  double total = integrate(f, 0.0, a);
  if (b > a) total += integrate(f, a, b);
  total += integrate(f, b, std::numeric_limits<double>::infinity());
  if (!std::isfinite(total)) throw std::runtime_error("occupation_second_moment: outer integral diverges");
  return 4.0 * cg * unit_sphere_area(d) * total;
}

double conditional_first_moment(std::span<const double> times, std::span<const double> points, const Ball& A) {
  const std::size_t d = A.dimension();
  if (points.size() != times.size() * d) throw std::invalid_argument("conditional_first_moment: size mismatch");
  if (times.size() < 2) return 0.0;
  auto v = [&](std::size_t k) { return occupation_first_moment_closed(points.subspan(k * d, d), A); };
  double sum = 0.0, prev = v(0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double cur = v(k);
    sum += 0.5 * (times[k] - times[k - 1]) * (prev + cur);
    prev = cur;
  }
  return 2.0 * sum;
}

double bm_hit_prob(std::span<const double> x, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("bm_hit_prob: r must be positive");
  double s = 0.0;
  for (double c : x) s += c * c;
  const double n = std::sqrt(s);
  if (n <= r) return 1.0;
  return std::pow(r / n, static_cast<double>(x.size()) - 2.0);
}

}  // namespace snake
