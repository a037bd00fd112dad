#pragma once

#include <gmpxx.h>

#include <vector>

namespace snake {

/// Piecewise polynomial on [b_0, b_K] with exact rational coefficients.
/// Piece k covers [b_k, b_{k+1}) (the last piece is closed) and its
/// coefficients are in the absolute time variable: sum_j c_j t^j.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<mpq_class> breakpoints, std::vector<std::vector<mpq_class>> pieces);

  static PiecewisePolynomial constant(const mpq_class& lo, const mpq_class& hi, const mpq_class& c);
  // 1 on [0, a], 0 on (a, hi]
  static PiecewisePolynomial indicator(const mpq_class& a, const mpq_class& hi);

  const std::vector<mpq_class>& breakpoints() const { return breaks_; }
  const std::vector<std::vector<mpq_class>>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }

  mpq_class operator()(const mpq_class& t) const;
  double eval(double t) const;

  // F(t) = int_{b_0}^t p(s) ds, continuous across breakpoints.
  PiecewisePolynomial antiderivative() const;
  // p(b_0 + b_K - t): reflection on the same interval.
  PiecewisePolynomial reflect() const;
  // Refines both onto the union of breakpoints (domains must coincide).
  PiecewisePolynomial refine(const std::vector<mpq_class>& breaks) const;

  friend PiecewisePolynomial operator*(const PiecewisePolynomial& a, const PiecewisePolynomial& b);
  friend PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b);
  PiecewisePolynomial scaled(const mpq_class& c) const;

  bool is_zero() const;
  // True if every piece agrees with its neighbours at shared breakpoints.
  bool continuous() const;

 private:
  std::vector<mpq_class> breaks_;
  std::vector<std::vector<mpq_class>> pieces_;
};

// Polynomial helpers on coefficient vectors.
mpq_class poly_eval(const std::vector<mpq_class>& c, const mpq_class& t);
std::vector<mpq_class> poly_mul(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b);
std::vector<mpq_class> poly_add(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b);
// c(T - t) expanded in t.
std::vector<mpq_class> poly_reflect(const std::vector<mpq_class>& c, const mpq_class& T);

}  // namespace snake
