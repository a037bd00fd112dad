#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <span>
#include <vector>

#include "snake/piecewise.hpp"

namespace snake {

struct MomentTable {
  std::size_t order = 0;
  PiecewisePolynomial h;
  mpq_class t_star;
  mpq_class moment;  // order! * h(t_star)
};

// h_1(t) = int_0^t phi, h_n(t) = 2 sum_{k=1}^{n-1} int_0^t h_k h_{n-k}; phi lives on [0, T*]
// and t_star must lie in that interval.
std::vector<MomentTable> h_hierarchy(const PiecewisePolynomial& phi, std::size_t N, const mpq_class& t_star);

// 4 [(T-t)^3 / 3 + (T-t)^2 t]
mpq_class second_moment_closed_form(const mpq_class& t, const mpq_class& T);

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
  std::size_t dimension() const { return center.size(); }
  double volume() const;
};

double unit_sphere_area(int d);      // |S^{d-1}|
double unit_ball_volume(int d);
double green_constant(int d);        // Gamma((d-2)/2) / (2 pi^{d/2})
double green(std::span<const double> x, std::span<const double> y);
double heat_kernel(double t, std::span<const double> x);

// int_A G(x, y) dy by adaptive quadrature over spheres around x (relative tol 1e-10).
double occupation_first_moment(std::span<const double> x, const Ball& A);
// Same integral from the uniform-ball potential (Newton), used as an oracle.
double occupation_first_moment_closed(std::span<const double> x, const Ball& A);
// 4 int G(x,y) [int_A G(y,z) dz]^2 dy.
double occupation_second_moment(std::span<const double> x, const Ball& A);
// 2 int_0^zeta dt int_A G(w(t), y) dy, trapezoid over the sampled path.
double conditional_first_moment(std::span<const double> times, std::span<const double> points, const Ball& A);

double bm_hit_prob(std::span<const double> x, double r);

}  // namespace snake
